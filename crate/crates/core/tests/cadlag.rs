mod common;

use common::{config, jump_path, norm, segment_oracle, step_oscillation_oracle, step_path};
use proptest::prelude::*;
use skorokhod::path::{completed_graph, oscillation, oscillation_profile, segment_distance};
use skorokhod::CadlagPath;

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 3)
}

fn diff(a: &[f64], b: &[f64]) -> f64 {
    norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn segment_distance_matches_oracle(a in vec3(), v in vec3(), b in vec3()) {
        let d = segment_distance(&a, &v, &b).unwrap();
        prop_assert!((d - segment_oracle(&a, &v, &b)).abs() < 1e-7);
    }

    #[test]
    fn segment_distance_is_lipschitz(a in vec3(), v in vec3(), b in vec3(), a2 in vec3(), v2 in vec3(), b2 in vec3()) {
        let lhs = segment_distance(&a, &v, &b).unwrap();
        let rhs = segment_distance(&a2, &v2, &b2).unwrap() + diff(&v, &v2) + diff(&a, &a2) + diff(&b, &b2);
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn segment_distance_under_perturbation(a in vec3(), v in vec3(), b in vec3(), pa in vec3(), pv in vec3(), pb in vec3()) {
        let lhs = segment_distance(&add(&a, &pa), &add(&v, &pv), &add(&b, &pb)).unwrap();
        let rhs = segment_distance(&a, &v, &b).unwrap() + norm(&pv) + norm(&pa).max(norm(&pb));
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn monotone_scalar_paths_do_not_oscillate(
        incs in prop::collection::vec(0.0..1.0f64, 2..30),
        down in any::<bool>(),
        jumps in prop::collection::vec(any::<bool>(), 30),
        delta in 0.01..1.0f64,
    ) {
        let n = incs.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let sign = if down { -1.0 } else { 1.0 };
        let (mut left, mut right) = (vec![0.0], vec![0.0]);
        let mut level = 0.0;
        for i in 1..n {
            if jumps[i] {
                left.push(level);
                level += sign * incs[i];
                right.push(level);
            } else {
                level += sign * incs[i];
                left.push(level);
                right.push(level);
            }
        }
        let p = CadlagPath::new(1, times, left, right).unwrap();
        prop_assert_eq!(oscillation(&p, delta, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn ray_monotone_paths_do_not_oscillate(
        incs in prop::collection::vec(0.0..1.0f64, 2..20),
        dir in prop::collection::vec(-1.0..1.0f64, 3),
        delta in 0.01..1.0f64,
    ) {
        let n = incs.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut s = 0.0;
        let vals: Vec<Vec<f64>> = incs
            .iter()
            .map(|x| {
                s += x;
                dir.iter().map(|d| d * s).collect()
            })
            .collect();
        let p = CadlagPath::piecewise_constant(times, &vals).unwrap();
        prop_assert!(oscillation(&p, delta, 0.01).unwrap() < 1e-12);
    }

    #[test]
    fn step_oscillation_matches_brute_force(
        n in 2usize..50,
        dim in 1usize..3,
        seed_vals in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 2), 50),
        m in 0usize..8,
    ) {
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<Vec<f64>> = seed_vals[..n].iter().map(|v| v[..dim].to_vec()).collect();
        let p = CadlagPath::piecewise_constant(times.clone(), &vals).unwrap();
        let delta = (m as f64 + 0.5) * h;
        let got = oscillation(&p, delta, 1.0).unwrap();
        let want = step_oscillation_oracle(&times, &vals, delta);
        prop_assert!((got - want).abs() < 1e-9, "got {} want {}", got, want);
    }

    #[test]
    fn oscillation_decays_dyadically(p in (3usize..25).prop_flat_map(|n| step_path(2, n))) {
        let deltas: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
        let prof = oscillation_profile(&p, &deltas, 0.01).unwrap();
        for w in prof.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(prof[9] < 1e-12);
    }

    #[test]
    fn graph_triples_bounded_by_oscillation(p in jump_path(2, 6), delta in 0.02..0.5f64) {
        let mesh = 0.01;
        let m = oscillation(&p, delta, mesh).unwrap();
        let g = completed_graph(&p);
        let verts: Vec<(f64, Vec<f64>)> = g.vertices().map(|(t, v)| (t, v.to_vec())).collect();
        for a in 0..verts.len() {
            for b in a..verts.len() {
                for c in b..verts.len() {
                    if verts[c].0 - verts[a].0 <= delta {
                        let s = segment_distance(&verts[a].1, &verts[b].1, &verts[c].1).unwrap();
                        prop_assert!(s <= m + 1e-9, "{} > {}", s, m);
                    }
                }
            }
        }
    }

    #[test]
    fn oscillation_non_decreasing_in_delta(p in jump_path(1, 8), d1 in 0.01..0.5f64, d2 in 0.01..0.5f64) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(oscillation(&p, lo, 0.01).unwrap() <= oscillation(&p, hi, 0.01).unwrap());
    }

    #[test]
    fn csv_round_trip_is_exact(p in jump_path(3, 8)) {
        prop_assert_eq!(CadlagPath::from_csv_str(&p.to_csv_string()).unwrap(), p);
    }
}

#[test]
fn planar_staircase_oscillates() {
    // each coordinate is monotone, yet the corner is off the chord
    let p = CadlagPath::piecewise_constant(vec![0.0, 0.4, 0.5, 1.0], &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]])
        .unwrap();
    let m = oscillation(&p, 0.2, 0.01).unwrap();
    assert!((m - 0.5f64.sqrt()).abs() < 1e-12);
}
