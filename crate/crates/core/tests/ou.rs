use skorokhod::convolution::{convolve, tv2_scalar};
use skorokhod::grid::uniform_grid;
use skorokhod::levy::{JumpLaw, LevyModel, LevyPathSample};
use skorokhod::linalg::mat_from_rows;
use skorokhod::m1::dm_strong_value;
use skorokhod::ou::{
    ax_gamma, figure1_paths, integrated_ou, intro_matrix, ou_kernel, phi_gamma, phi_path, semigroup_matrix, simulate_ou,
    DiagonalOuSpec, Figure1Config,
};

fn coarsen(fine: &LevyPathSample, factor: usize) -> LevyPathSample {
    let d = fine.dim;
    let n = fine.n_cells() / factor;
    let grid: Vec<f64> = (0..=n).map(|i| fine.grid[i * factor]).collect();
    let mut inc = vec![0.0; n * d];
    for i in 0..n {
        for j in 0..factor {
            for a in 0..d {
                inc[i * d + a] += fine.increments[(i * factor + j) * d + a];
            }
        }
    }
    LevyPathSample {
        grid,
        dim: d,
        gaussian: inc.clone(),
        increments: inc,
        surrogate: None,
        series_floor: None,
        jumps: None,
        decomposition: None,
    }
}

/// `max_i |Y_k(t_i) + lambda_k X_k(t_i) - K_k(t_i)|` over coordinates.
fn weak_residual(spec: &DiagonalOuSpec, s: &LevyPathSample) -> f64 {
    let y = simulate_ou(spec, s).unwrap();
    let x = integrated_ou(spec, &y).unwrap();
    let k = s.path();
    let mut worst = 0.0_f64;
    for i in 0..y.len() {
        for c in 0..spec.dim() {
            worst = worst.max((y.right(i)[c] + spec.lambdas[c] * x.right(i)[c] - k.right(i)[c]).abs());
        }
    }
    worst
}

#[test]
fn kernels_are_bounded_and_converge_off_zero() {
    for lambda in [0.5, 1.0, 3.0, 9.0] {
        for gamma in [1.0, 10.0, 1e3, 1e5] {
            let phi = phi_gamma(lambda, gamma);
            assert_eq!(phi(0.0), 0.0);
            for k in 0..=200 {
                let t = -1.0 + 2.0 * k as f64 / 200.0;
                assert!(phi(t).abs() <= 1.0);
            }
        }
        for t in [1e-3, 0.01, 0.5, 1.0] {
            let mut last = f64::INFINITY;
            for gamma in [10.0, 1e2, 1e3, 1e4, 1e5, 1e6] {
                let gap = (phi_gamma(lambda, gamma)(t) + 1.0).abs();
                assert!(gap <= last);
                last = gap;
            }
            assert!(last < 1e-6 + (-lambda * 1e6 * t).exp());
        }
    }
}

#[test]
fn kernel_paths_converge_in_m1() {
    let mesh = 2e-3;
    for lambda in [1.0, 3.0] {
        let base = DiagonalOuSpec::identity_noise(vec![lambda], 1.0, 1.0);
        let limit = phi_path(&base, 0, true, 2000).unwrap();
        let mut last = f64::INFINITY;
        for gamma in [10.0, 1e2, 1e3, 1e4] {
            let p = phi_path(&base.with_gamma(gamma), 0, false, 2000).unwrap();
            let d = dm_strong_value(&p, &limit, mesh).unwrap();
            assert!(d <= last + mesh, "lambda {lambda}, gamma {gamma}: {d} after {last}");
            last = d;
        }
        assert!(last <= 2.0 * mesh, "{last}");
    }
}

#[test]
fn kernel_two_variation_is_bounded() {
    for gamma in [10.0, 1e3] {
        let phi = phi_gamma(2.0, gamma);
        for steps in [64, 256, 1024, 4096] {
            let xs: Vec<f64> = (0..=steps).map(|k| phi(k as f64 / steps as f64)).collect();
            let v = tv2_scalar(&xs).value;
            assert!(v <= 1.0 + 1e-12);
            assert!(v >= (xs[steps] - xs[0]).abs());
        }
    }
}

#[test]
fn weak_identity_has_first_order_error() {
    let spec = DiagonalOuSpec::identity_noise(vec![1.0, 4.0], 10.0, 1.0);
    let drift = LevyModel::zero(2).with_drift(vec![1.0, -0.5]);
    let fine = drift.sample_path(&uniform_grid(0.0, 1.0, 4096).unwrap(), 0).unwrap();
    let errs: Vec<f64> = [32, 16, 8, 4].iter().map(|f| weak_residual(&spec, &coarsen(&fine, *f))).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.7..2.3).contains(&ratio), "{errs:?}");
    }
    let noisy = LevyModel::brownian(2).with_cov(vec![vec![0.1, 0.0], vec![0.0, 0.1]]);
    let fine = noisy.sample_path(&uniform_grid(0.0, 1.0, 4096).unwrap(), 1).unwrap();
    let errs: Vec<f64> = [64, 16, 4, 1].iter().map(|f| weak_residual(&spec, &coarsen(&fine, *f))).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn recursion_agrees_with_kernel_convolution() {
    let spec = DiagonalOuSpec { lambdas: vec![1.0, 3.0], gamma: 50.0, g: vec![vec![1.0, 0.5], vec![0.0, 2.0]], horizon: 1.0 };
    let m = LevyModel::compound_poisson(2, 5.0, JumpLaw::Gaussian { mean: vec![0.0; 2], cov: vec![vec![1.0, 0.0], vec![0.0, 1.0]] })
        .with_cov(vec![vec![0.2, 0.0], vec![0.0, 0.2]]);
    let s = m.sample_path(&uniform_grid(0.0, 1.0, 256).unwrap(), 4).unwrap();
    let fast = ax_gamma(&spec, &s).unwrap();
    let slow = convolve(&ou_kernel(&spec).unwrap().gamma, &s).unwrap();
    for i in 0..fast.len() {
        for c in 0..2 {
            assert!((fast.right(i)[c] - slow.right(i)[c]).abs() < 1e-10);
        }
    }
}

#[test]
fn rotation_exponential_has_closed_form() {
    let a4 = mat_from_rows(&intro_matrix(4).unwrap());
    for (gamma, s) in [(1.0, 0.3), (10.0, 0.05), (1e3, 1e-3), (1e3, 0.01)] {
        let e = semigroup_matrix(&a4, gamma, s).unwrap();
        let (c, sn, r) = ((gamma * s).cos(), (gamma * s).sin(), (-gamma * s).exp());
        let want = [[r * c, -r * sn], [r * sn, r * c]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[(i, j)] - want[i][j]).abs() < 1e-10, "{gamma} {s}: {e}");
            }
        }
    }
}

#[test]
fn figure_panels_are_reproducible_and_a1_follows_the_driver() {
    let cfg = Figure1Config { steps: 512, ..Default::default() };
    let a = figure1_paths(1, &cfg).unwrap();
    assert_eq!(a.ax_gamma, figure1_paths(1, &cfg).unwrap().ax_gamma);
    let d = dm_strong_value(&a.ax_gamma, &a.levy, 0.02).unwrap();
    assert!(d < 0.1, "{d}");
    let tiny = figure1_paths(4, &Figure1Config { gamma: 1e-9, ..cfg }).unwrap();
    assert!(tiny.ax_gamma.breakpoints().all(|(_, _, r)| r.iter().all(|x| x.abs() < 1e-6)));
}
