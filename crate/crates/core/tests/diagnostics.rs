mod common;

use common::config;
use proptest::prelude::*;
use skorokhod::convolution::{maximal_bound_general, Kernel};
use skorokhod::diagnostics::{
    binomial_estimate, charfn_validate, dm_scan, fdd_scan, maximal_inequality_audit, run_scan, trend_verdict, DmMode,
    RowKind, ScanConfig, ScanMode, SystemSpec, ValidationConfig, Verdict,
};
use skorokhod::levy::{small_jump_factorization, JumpLaw, LevyModel};
use skorokhod::levy::SmallJumpFactorization;

fn ou2(steps: usize) -> SystemSpec {
    let model = LevyModel::compound_poisson(2, 3.0, JumpLaw::Gaussian { mean: vec![0.0; 2], cov: vec![vec![1.0, 0.0], vec![0.0, 1.0]] })
        .with_cov(vec![vec![0.09, 0.0], vec![0.0, 0.09]]);
    SystemSpec::DiagonalOu { lambdas: vec![1.0, 3.0], g: None, model, steps, horizon: 1.0 }
}

#[test]
fn marginals_of_the_diagonal_system_settle() {
    let sys = ou2(512).build().unwrap();
    let c = ScanConfig {
        gammas: vec![1e3],
        epsilons: vec![0.05],
        checkpoints: vec![0.5],
        functionals: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        n_paths: 400,
        ..Default::default()
    };
    let rows = fdd_scan(&c, sys.as_ref()).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r.estimate < 0.1, "{r:?}");
    }
}

#[test]
fn product_mode_decreases_along_gamma() {
    let sys = ou2(512).build().unwrap();
    let c = ScanConfig { epsilons: vec![0.1], n_paths: 200, mesh: 0.01, ..Default::default() };
    let rows = dm_scan(&c, sys.as_ref(), DmMode::Product).unwrap();
    let p: Vec<(f64, f64)> = rows.iter().filter(|r| r.kind == RowKind::DmProduct).map(|r| (r.estimate, r.stderr)).collect();
    assert_eq!(p.len(), 3);
    assert!(p[2].0 < p[0].0, "{p:?}");
    assert_eq!(trend_verdict(&p, 0.05), Verdict::Converging, "{p:?}");
}

#[test]
fn estimates_are_proportions_with_binomial_errors() {
    let sys = ou2(128).build().unwrap();
    // the delta grid has to reach below the cell width 1/128 for the oscillation limit
    let c = ScanConfig {
        epsilons: vec![0.02, 0.1],
        deltas: vec![0.05, 0.02, 0.01, 0.005, 0.002],
        n_paths: 100,
        mesh: 0.05,
        ..Default::default()
    };
    let all = [ScanMode::Fdd, ScanMode::Oscillation, ScanMode::Strong, ScanMode::Product, ScanMode::Weak];
    let r = run_scan("ou2", &c, sys.as_ref(), &all).unwrap();
    for row in &r.rows {
        assert!((0.0..=1.0).contains(&row.estimate));
        let hits = (row.estimate * 100.0).round() as usize;
        assert_eq!(binomial_estimate(hits, 100), (row.estimate, row.stderr));
    }
    assert!(r.cross_check.holds, "{:?}", r.verdicts);
    assert_eq!(r.to_csv_string(), run_scan("ou2", &c, sys.as_ref(), &all).unwrap().to_csv_string());
    let moved = run_scan("ou2", &ScanConfig { base_seed: 1, ..c.clone() }, sys.as_ref(), &all).unwrap();
    assert_ne!(r.to_csv_string(), moved.to_csv_string());
}

#[test]
fn uncoupled_ensembles_do_not_converge() {
    let sys = SystemSpec::Uncoupled { inner: Box::new(ou2(512)) }.build().unwrap();
    let c = ScanConfig { n_paths: 100, mesh: 0.02, ..Default::default() };
    let r = run_scan("uncoupled", &c, sys.as_ref(), &[ScanMode::Fdd, ScanMode::Product]).unwrap();
    assert_eq!(r.verdicts.fdd, Some(Verdict::NotConverging));
    assert_eq!(r.verdicts.product, Some(Verdict::NotConverging));
}

#[test]
fn charfn_closed_forms() {
    let cfg = ValidationConfig { n_paths: 100_000, steps: 64, seed: 3, ..Default::default() };
    let k = Kernel::identity(1, 1.0).unwrap();
    for (model, f) in [
        (LevyModel::isotropic_stable(1, 1.5, 1.0), Box::new(|b: f64| (-b.abs().powf(1.5)).exp()) as Box<dyn Fn(f64) -> f64>),
        (LevyModel::brownian(1), Box::new(|b: f64| (-b * b / 2.0).exp())),
    ] {
        let rows = charfn_validate(&k, &model, &[vec![1.0]], &[0.5, 1.0, 2.0], &cfg).unwrap();
        for r in rows {
            assert!((r.analytic.0 - f(r.beta)).abs() < 1e-12 && r.analytic.1 == 0.0);
            assert!(r.pass, "{r:?}");
        }
    }
}

#[test]
fn audit_of_a_monotone_kernel() {
    let k = Kernel::scalar((0.0, 1.0), |s| (-2.0 * s).exp()).unwrap().with_steps(256).unwrap();
    let m = LevyModel::compound_poisson(1, 20.0, JumpLaw::PointMass { at: vec![0.3] });
    let cfg = ValidationConfig { n_paths: 2000, steps: 256, seed: 8, ..Default::default() };
    let r = maximal_inequality_audit(&k, &m, 0.5, &cfg).unwrap();
    assert!(r.pass && r.ratio < 1.0, "{r:?}");
}

#[test]
fn bound_is_linear_in_the_factor_scale() {
    let k = Kernel::scalar((0.0, 1.0), |s| (3.0 * s).cos()).unwrap();
    let m = LevyModel::compound_poisson(1, 5.0, JumpLaw::UniformBall { dim: 1, radius: 1.0 });
    let f = small_jump_factorization(&m, 0.5).unwrap();
    let b = maximal_bound_general(&k, &f, 1.0).unwrap();
    for c in [0.5, 2.0, 7.0] {
        let scaled = maximal_bound_general(&k, &f.scaled(c), 1.0).unwrap();
        assert!((scaled - c * b).abs() < 1e-12 * scaled.abs().max(1.0));
    }
    let single = SmallJumpFactorization::from_factors(0.5, vec![(4.0, vec![1.0])]).unwrap();
    let double = SmallJumpFactorization::from_factors(0.5, vec![(16.0, vec![1.0])]).unwrap();
    let (b1, b2) = (maximal_bound_general(&k, &single, 1.0).unwrap(), maximal_bound_general(&k, &double, 1.0).unwrap());
    assert!((b2 - 2.0 * b1).abs() < 1e-12 * b2);
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn raising_the_threshold_never_raises_estimates(eps in prop::collection::vec(0.01..0.5f64, 2..5)) {
        let mut eps = eps;
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        let sys = SystemSpec::RampStep { tau: 0.4, horizon: 1.0 }.build().unwrap();
        let c = ScanConfig { gammas: vec![2.0, 5.0, 20.0], epsilons: eps.clone(), n_paths: 100, mesh: 0.02, ..Default::default() };
        let rows = dm_scan(&c, sys.as_ref(), DmMode::Strong).unwrap();
        for g in &c.gammas {
            let p: Vec<f64> = rows.iter().filter(|r| r.gamma == *g).map(|r| r.estimate).collect();
            prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn verdict_rule_is_consistent(seq in prop::collection::vec((0.0..1.0f64, 0.0..0.05f64), 1..6), tol in 0.0..0.3f64) {
        let v = trend_verdict(&seq, tol);
        let (last, se) = *seq.last().unwrap();
        match v {
            Verdict::Converging => prop_assert!(last <= tol),
            Verdict::NotConverging => prop_assert!(last - 2.0 * se > tol),
            Verdict::Inconclusive => prop_assert!(last - 2.0 * se <= tol),
        }
        prop_assert_eq!(Verdict::combine([v, Verdict::NotConverging]), Some(Verdict::NotConverging));
        prop_assert_eq!(Verdict::combine([v]), Some(v));
    }
}
