use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Assertions, ExperimentConfig, LoadedConfig};
use super::svg::{path_svg, polylines_svg};
use crate::convolution::convolve;
use crate::diagnostics::{
    charfn_validate_against, maximal_inequality_audit, run_scan, AuditRow, CharfnRow, ConvergenceReport, RowKind,
};
use crate::error::{Error, Result};
use crate::grid::uniform_grid;
use crate::m1::{dm_strong, dm_strong_default, M1Result};
use crate::ou::figure1_paths;
use crate::path::{fmt_f64, CadlagPath};

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssertionResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a ExperimentConfig,
    files: Vec<String>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, body)?;
        self.files.push(p);
        Ok(())
    }

    fn finish(mut self, command: &str, config: &ExperimentConfig, passed: bool, summary: Vec<String>) -> Result<Outcome> {
        let names = self.files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
        let m = Manifest { artifact: "skorokhod", version: env!("CARGO_PKG_VERSION"), command, config, files: names };
        self.put("manifest.json", &(serde_json::to_string_pretty(&m)? + "\n"))?;
        Ok(Outcome { passed, files: self.files, summary })
    }
}

/// `t,x_1,..,x_d` from the right-continuous values.
pub fn values_csv(path: &CadlagPath) -> String {
    let mut s = String::from("t");
    for k in 1..=path.dim() {
        s.push_str(&format!(",x_{k}"));
    }
    s.push('\n');
    for (t, _, r) in path.breakpoints() {
        s.push_str(&fmt_f64(t));
        for x in r {
            s.push(',');
            s.push_str(&fmt_f64(*x));
        }
        s.push('\n');
    }
    s
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    if cfg.figure1.is_some() {
        return cmd_figure1(cfg, out);
    }
    let model = cfg.model.as_ref().ok_or_else(|| Error::InvalidArgument("simulate needs `model`".into()))?;
    model.validate()?;
    let grid = uniform_grid(0.0, cfg.horizon, cfg.steps)?;
    let sample = model.sample_path(&grid, cfg.seed)?;
    let mut w = Writer::new(out)?;
    let levy = sample.path();
    w.put("levy.csv", &levy.to_csv_string())?;
    if cfg.emit_svg {
        w.put("levy.svg", &path_svg(&levy, "levy"))?;
    }
    let mut summary = vec![format!("simulated {} cells of a {}-dimensional driver", cfg.steps, model.dim)];
    if let Some(k) = &cfg.kernel {
        let conv = convolve(&k.build(cfg.horizon)?, &sample)?;
        w.put("convolution.csv", &conv.to_csv_string())?;
        if cfg.emit_svg {
            w.put("convolution.svg", &path_svg(&conv, "convolution"))?;
        }
        summary.push(format!("convolved into {} dimensions", conv.dim()));
    }
    w.finish("simulate", cfg, true, summary)
}

pub fn cmd_figure1(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let f = cfg.figure1.clone().unwrap_or_default();
    let mut w = Writer::new(out)?;
    let mut summary = Vec::new();
    for j in 1..=4 {
        let panel = figure1_paths(j, &f)?;
        let csv = values_csv(&panel.ax_gamma);
        w.put(&format!("ax_gamma_A{j}.csv"), &csv)?;
        if cfg.emit_svg {
            let pts: Vec<(f64, f64)> = panel.ax_gamma.breakpoints().map(|(_, _, r)| (r[0], r[1])).collect();
            w.put(&format!("ax_gamma_A{j}.svg"), &polylines_svg(&[pts], &format!("A_{j} X_gamma")))?;
        }
        if j == 1 {
            w.put("levy.csv", &panel.levy.to_csv_string())?;
        }
        summary.push(format!("A_{j}: {} points", panel.ax_gamma.len()));
    }
    w.finish("figure1", cfg, true, summary)
}

pub fn check_assertions(report: &ConvergenceReport, a: &Assertions, base: &Path) -> Result<Vec<AssertionResult>> {
    let mut out = Vec::new();
    let v = &report.verdicts;
    for (name, want, got) in [
        ("fdd", a.fdd, v.fdd),
        ("oscillation", a.oscillation, v.oscillation),
        ("strong", a.strong, v.strong),
        ("product", a.product, v.product),
        ("weak", a.weak, v.weak),
    ] {
        if let Some(want) = want {
            out.push(AssertionResult {
                name: format!("{name} verdict"),
                pass: got == Some(want),
                detail: format!("expected {want:?}, observed {got:?}"),
            });
        }
    }
    if a.cross_check {
        out.push(AssertionResult {
            name: "cross check".into(),
            pass: report.cross_check.holds,
            detail: report.cross_check.detail.clone(),
        });
    }
    if let Some(floor) = a.oscillation_floor {
        let top = report.rows_of(RowKind::Oscillation).map(|r| r.gamma).fold(f64::NEG_INFINITY, f64::max);
        let rows: Vec<_> = report.rows_of(RowKind::Oscillation).filter(|r| r.gamma == top).collect();
        let min = rows.iter().map(|r| r.estimate).fold(f64::INFINITY, f64::min);
        out.push(AssertionResult {
            name: "oscillation floor".into(),
            pass: !rows.is_empty() && min > floor,
            detail: format!("smallest largest-gamma estimate {min} vs floor {floor}"),
        });
    }
    if let Some(b) = &a.baseline {
        let p = if b.is_absolute() { b.clone() } else { base.join(b) };
        let want = fs::read_to_string(&p)?;
        out.push(AssertionResult {
            name: "baseline".into(),
            pass: want == report.to_csv_string(),
            detail: format!("report CSV against {}", p.display()),
        });
    }
    Ok(out)
}

pub fn cmd_scan(loaded: &LoadedConfig, out: &Path) -> Result<Outcome> {
    let cfg = &loaded.config;
    let system = cfg.system.as_ref().ok_or_else(|| Error::InvalidArgument("scan needs `system`".into()))?.build()?;
    let report = run_scan(&cfg.scenario, &cfg.scan, system.as_ref(), &cfg.modes)?;
    let checks = check_assertions(&report, &cfg.assertions, &loaded.base)?;
    let mut w = Writer::new(out)?;
    w.put("report.csv", &report.to_csv_string())?;
    w.put("report.json", &(report.to_json()? + "\n"))?;
    w.put("assertions.json", &(serde_json::to_string_pretty(&checks)? + "\n"))?;
    let mut summary = vec![format!("verdicts: {}", serde_json::to_string(&report.verdicts)?)];
    summary.extend(checks.iter().map(|c| format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)));
    let passed = checks.iter().all(|c| c.pass);
    w.finish("scan", cfg, passed, summary)
}

#[derive(Serialize)]
struct ValidationTable {
    charfn: Vec<CharfnRow>,
    audits: Vec<AuditRow>,
}

pub fn cmd_validate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.validate.as_ref().ok_or_else(|| Error::InvalidArgument("validate needs `validate`".into()))?;
    let s = &spec.settings;
    let mut charfn = Vec::new();
    for (i, case) in spec.charfn.iter().enumerate() {
        let k = case.kernel.build(s.horizon)?;
        let sampling = case.sampling_model.as_ref().unwrap_or(&case.model);
        let settings = crate::diagnostics::ValidationConfig { seed: s.seed.wrapping_add(i as u64), ..s.clone() };
        charfn.extend(charfn_validate_against(&k, &case.model, sampling, &case.functionals, &case.betas, &settings)?);
    }
    let mut audits = Vec::new();
    for (i, case) in spec.audits.iter().enumerate() {
        let mut k = case.kernel.build(s.horizon)?;
        if let Some(v) = &case.functional {
            k = k.functional(v)?;
        }
        let settings = crate::diagnostics::ValidationConfig {
            seed: s.seed.wrapping_add(1000 + i as u64),
            n_paths: case.n_paths.unwrap_or(s.n_paths),
            ..s.clone()
        };
        audits.push(maximal_inequality_audit(&k, &case.model, case.alpha_cut, &settings)?);
    }
    let mut csv = String::from("kind,index,v,beta,empirical_re,empirical_im,analytic_re,analytic_im,gap,stderr,pass\n");
    for (i, r) in charfn.iter().enumerate() {
        let v: Vec<String> = r.v.iter().map(|x| x.to_string()).collect();
        csv.push_str(&format!(
            "charfn,{i},{},{},{},{},{},{},{},{},{}\n",
            v.join(";"),
            r.beta,
            r.empirical.0,
            r.empirical.1,
            r.analytic.0,
            r.analytic.1,
            r.gap,
            r.stderr,
            r.pass
        ));
    }
    let mut audit_csv = String::from("index,alpha_cut,empirical,stderr,bound,ratio,pass\n");
    for (i, r) in audits.iter().enumerate() {
        audit_csv.push_str(&format!("{i},{},{},{},{},{},{}\n", r.alpha_cut, r.empirical, r.stderr, r.bound, r.ratio, r.pass));
    }
    let passed = charfn.iter().all(|r| r.pass) && audits.iter().all(|r| r.pass);
    let mut summary: Vec<String> = charfn
        .iter()
        .map(|r| format!("{} charfn v={:?} beta={}: gap {:.3e}, 4se {:.3e}", if r.pass { "PASS" } else { "FAIL" }, r.v, r.beta, r.gap, 4.0 * r.stderr))
        .collect();
    summary.extend(audits.iter().map(|r| {
        format!("{} audit cut={}: mean sup {:.4e} vs bound {:.4e}", if r.pass { "PASS" } else { "FAIL" }, r.alpha_cut, r.empirical, r.bound)
    }));
    let mut w = Writer::new(out)?;
    w.put("charfn.csv", &csv)?;
    w.put("audit.csv", &audit_csv)?;
    w.put("validation.json", &(serde_json::to_string_pretty(&ValidationTable { charfn, audits })? + "\n"))?;
    w.finish("validate", cfg, passed, summary)
}

/// Reads two path CSVs and matches them.
pub fn cmd_distance(a: &Path, b: &Path, mesh: Option<f64>, matching: Option<&Path>) -> Result<M1Result> {
    let read = |p: &Path| -> Result<CadlagPath> {
        let f = fs::File::open(p)?;
        CadlagPath::read_csv(std::io::BufReader::new(f))
    };
    let (fa, fb) = (read(a)?, read(b)?);
    let r = match mesh {
        Some(m) => dm_strong(&fa, &fb, m)?,
        None => dm_strong_default(&fa, &fb)?,
    };
    if let Some(p) = matching {
        r.matching.write_csv(fs::File::create(p)?)?;
    }
    Ok(r)
}
