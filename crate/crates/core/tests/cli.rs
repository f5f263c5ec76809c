use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skorokhod::cli::svg::{parse_polylines, path_lines};
use skorokhod::CadlagPath;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_skorokhod"));
    c.env_remove("SKOROKHOD_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn baseline(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("baselines").join(format!("{name}.csv"))
}

#[test]
fn zero_noise_simulation_is_all_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.json",
        r#"{"scenario": "zero", "model": {"dim": 2, "drift": [0, 0], "cov": [[0, 0], [0, 0]], "jump": {"type": "none"}},
            "kernel": {"type": "identity", "dim": 2}, "steps": 64}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["simulate", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["levy.csv", "convolution.csv"] {
        let p = CadlagPath::from_csv_str(&fs::read_to_string(out.join(f)).unwrap()).unwrap();
        assert_eq!(p.len(), 65);
        assert!(p.breakpoints().all(|(_, l, r)| l.iter().chain(r).all(|x| *x == 0.0)));
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "stable.json",
        r#"{"scenario": "s", "model": {"dim": 2, "drift": [0.5, 0], "cov": [[0.1, 0], [0, 0.1]],
            "jump": {"type": "isotropic_stable", "alpha": 1.5, "scale": 1.0}},
            "kernel": {"type": "constant", "matrix": [[1, 0], [0.5, 2]]}, "steps": 256, "seed": 11}"#,
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for d in [&a, &b] {
        assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", &out_arg(d)])), 0);
    }
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--set", "seed=12", "--out", &out_arg(&c)])), 0);
    for f in ["levy.csv", "convolution.csv", "levy.svg", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(a.join("levy.csv")).unwrap(), fs::read(c.join("levy.csv")).unwrap());
}

#[test]
fn svg_carries_the_csv_polyline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f1");
    let o = run(&["figure1", "--set", "figure1.steps=256", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0);
    for j in 1..=4 {
        let csv = fs::read_to_string(out.join(format!("ax_gamma_A{j}.csv"))).unwrap();
        assert!(csv.starts_with("t,x_1,x_2\n"));
        let pts: Vec<(f64, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
                (v[1], v[2])
            })
            .collect();
        assert_eq!(pts.len(), 257);
        let svg = fs::read_to_string(out.join(format!("ax_gamma_A{j}.svg"))).unwrap();
        assert!(svg.contains("width=\"480\" height=\"480\""));
        assert_eq!(parse_polylines(&svg), vec![pts]);
    }
    let levy = CadlagPath::from_csv_str(&fs::read_to_string(out.join("levy.csv")).unwrap()).unwrap();
    let sim = dir.path().join("sim");
    let cfg = write_config(
        dir.path(),
        "cp.json",
        r#"{"scenario": "cp", "model": {"dim": 1, "drift": [0], "cov": [[0]],
            "jump": {"type": "finite_activity", "intensity": 5, "law": {"type": "point_mass", "at": [1]}}}, "steps": 128}"#,
    );
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", &out_arg(&sim)])), 0);
    let p = CadlagPath::from_csv_str(&fs::read_to_string(sim.join("levy.csv")).unwrap()).unwrap();
    assert_eq!(parse_polylines(&fs::read_to_string(sim.join("levy.svg")).unwrap()), path_lines(&p));
    assert_eq!(levy.dim(), 2);
}

#[test]
fn distance_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    fs::write(&a, CadlagPath::step(0.0, 1.0, 0.4, 0.0, 1.0).unwrap().to_csv_string()).unwrap();
    fs::write(&b, CadlagPath::step(0.0, 1.0, 0.5, 0.0, 1.0).unwrap().to_csv_string()).unwrap();
    fs::write(&c, CadlagPath::constant(0.0, 1.0, &[0.0, 0.0]).unwrap().to_csv_string()).unwrap();
    let parse = |o: &Output| -> f64 {
        stdout(o).lines().find_map(|l| l.strip_prefix("distance ")).unwrap().parse().unwrap()
    };
    let o = run(&["distance", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(parse(&o), 0.0);
    let mesh = 0.005;
    let m = dir.path().join("match.csv");
    let o = run(&["distance", a.to_str().unwrap(), b.to_str().unwrap(), "--mesh", "0.005", "--matching", m.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!((parse(&o) - 0.1).abs() <= 2.0 * mesh, "{}", stdout(&o));
    assert!(fs::read_to_string(&m).unwrap().starts_with("i,j,r_a,r_b,cost\n"));
    assert_eq!(code(&run(&["distance", a.to_str().unwrap(), c.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["distance", a.to_str().unwrap(), "/nonexistent.csv"])), 2);
}

#[test]
fn scan_exit_codes_follow_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ramp");
    let base = baseline("ramp_step");
    let o = run(&["scan", "preset:ramp_step", "--set", &format!("assertions.baseline={}", base.display()), "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(fs::read_to_string(out.join("report.csv")).unwrap(), fs::read_to_string(&base).unwrap());
    for f in ["report.json", "assertions.json", "manifest.json"] {
        assert!(out.join(f).exists());
    }
    let o = run(&["scan", "preset:ramp_step", "--set", "assertions.strong=\"not_converging\"", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL strong verdict"));
    assert_eq!(code(&run(&["scan", "preset:ramp_step", "--set", "scan.n_paths=50", "--out", &out_arg(&out)])), 2);
    assert_eq!(code(&run(&["scan", "preset:ramp_step", "--set", "scan.nonsense=1", "--out", &out_arg(&out)])), 2);
    assert_eq!(code(&run(&["scan", "preset:no_such_preset"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["scan", "preset:ramp_step"])
        .env("SKOROKHOD_OUT", dir.path())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("report.csv").exists());
}

#[test]
fn validation_catches_a_wrong_drift() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good");
    let o = run(&["validate", "preset:validate_gaussian", "--set", "validate.settings.n_paths=20000", "--out", &out_arg(&good)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let bad = dir.path().join("bad");
    let drifted = r#"validate.charfn.0.sampling_model={"dim": 1, "drift": [0.2], "cov": [[1]], "jump": {"type": "none"}}"#;
    let o = run(&["validate", "preset:validate_gaussian", "--set", "validate.settings.n_paths=20000", "--set", drifted, "--out", &out_arg(&bad)]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(fs::read_to_string(bad.join("charfn.csv")).unwrap().contains(",false"));
    let o = run(&["validate", "preset:validate_zero", "--out", &out_arg(&dir.path().join("zero"))]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn presets_print_as_json() {
    let o = run(&["preset", "diagonal_ou"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["system"]["lambdas"], serde_json::json!([1.0, 3.0, 9.0]));
    assert!(stdout(&run(&["preset"])).lines().any(|l| l == "figure1_a4"));
}
