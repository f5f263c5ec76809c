use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolution::{char_function_of_integral, convolve, maximal_bound_general, Kernel};
use crate::error::{Error, Result};
use crate::grid::uniform_grid;
use crate::levy::{decompose, small_jump_factorization, LevyModel, Part};
use crate::rng::member_seed;

/// Minimum ensemble for characteristic-function validation.
pub const MIN_CHARFN_PATHS: usize = 10_000;

/// Ensemble settings shared by the validation routines.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub horizon: f64,
    pub steps: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { n_paths: 100_000, seed: 0, horizon: 1.0, steps: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharfnRow {
    pub v: Vec<f64>,
    pub beta: f64,
    pub empirical: (f64, f64),
    pub analytic: (f64, f64),
    pub gap: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Empirical characteristic function of `<(F * L)(T), v>` against the analytic one.
pub fn charfn_validate(
    kernel: &Kernel,
    model: &LevyModel,
    vs: &[Vec<f64>],
    betas: &[f64],
    cfg: &ValidationConfig,
) -> Result<Vec<CharfnRow>> {
    charfn_validate_against(kernel, model, model, vs, betas, cfg)
}

/// As [`charfn_validate`], but paths come from `sampling` while the analytic
/// value uses `model`. A mismatch is a negative control.
pub fn charfn_validate_against(
    kernel: &Kernel,
    model: &LevyModel,
    sampling: &LevyModel,
    vs: &[Vec<f64>],
    betas: &[f64],
    cfg: &ValidationConfig,
) -> Result<Vec<CharfnRow>> {
    if cfg.n_paths < MIN_CHARFN_PATHS {
        return Err(Error::EnsembleTooSmall { n: cfg.n_paths, min: MIN_CHARFN_PATHS });
    }
    if sampling.dim != kernel.cols() || model.dim != kernel.cols() {
        return Err(Error::DimensionMismatch { expected: kernel.cols(), got: sampling.dim });
    }
    if let Some(v) = vs.iter().find(|v| v.len() != kernel.rows()) {
        return Err(Error::DimensionMismatch { expected: kernel.rows(), got: v.len() });
    }
    let grid = uniform_grid(0.0, cfg.horizon, cfg.steps)?;
    let n = cfg.steps;
    let d = kernel.cols();
    // <F(T - t_j) dL_j, v> = <dL_j, F(T - t_j)^T v>
    let weights: Vec<Vec<f64>> = vs
        .iter()
        .map(|v| (0..n).flat_map(|j| kernel.adjoint_apply(cfg.horizon - grid[j], v)).collect())
        .collect();
    let projections: Vec<Vec<f64>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = member_seed(cfg.seed, i);
            let s = sampling.sample_path(&grid, seed).map_err(|e| e.at_seed(seed))?;
            Ok(weights.iter().map(|w| (0..n * d).map(|k| w[k] * s.increments[k]).sum()).collect())
        })
        .collect::<Result<_>>()?;

    let m = cfg.n_paths as f64;
    let mut rows = Vec::new();
    for (vi, v) in vs.iter().enumerate() {
        for &beta in betas {
            let (mut c, mut s, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
            for p in &projections {
                let (si, ci) = (beta * p[vi]).sin_cos();
                c += ci;
                s += si;
                c2 += ci * ci;
                s2 += si * si;
            }
            let emp = Complex64::new(c / m, s / m);
            let var = (c2 / m - emp.re * emp.re).max(0.0) + (s2 / m - emp.im * emp.im).max(0.0);
            let stderr = (var / m).sqrt();
            let an = char_function_of_integral(kernel, model, v, beta, cfg.horizon)?;
            let gap = (emp - an).norm();
            rows.push(CharfnRow {
                v: v.clone(),
                beta,
                empirical: (emp.re, emp.im),
                analytic: (an.re, an.im),
                gap,
                stderr,
                pass: gap <= 4.0 * stderr,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub alpha_cut: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `empirical / bound`, 0 when both vanish.
    pub ratio: f64,
    pub pass: bool,
}

/// `E sup_t |int_0^t f(t - s) dX_alpha(s)|` against the analytic bound, for a
/// scalar-target kernel.
pub fn maximal_inequality_audit(
    kernel: &Kernel,
    model: &LevyModel,
    alpha_cut: f64,
    cfg: &ValidationConfig,
) -> Result<AuditRow> {
    if kernel.rows() != 1 {
        return Err(Error::InvalidArgument("the audit needs a scalar-target kernel; use Kernel::functional".into()));
    }
    if cfg.n_paths < 2 {
        return Err(Error::EnsembleTooSmall { n: cfg.n_paths, min: 2 });
    }
    let fact = small_jump_factorization(model, alpha_cut)?;
    let bound = maximal_bound_general(kernel, &fact, cfg.horizon)?;
    let grid = uniform_grid(0.0, cfg.horizon, cfg.steps)?;
    let sups: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = member_seed(cfg.seed, i);
            let run = || -> Result<f64> {
                let s = decompose(&model.sample_path(&grid, seed)?, model, alpha_cut)?;
                let p = convolve(kernel, &s.part_sample(Part::X)?)?;
                Ok(p.breakpoints().map(|(_, l, r)| l[0].abs().max(r[0].abs())).fold(0.0, f64::max))
            };
            run().map_err(|e| e.at_seed(seed))
        })
        .collect::<Result<_>>()?;
    let m = sups.len() as f64;
    let mean = sups.iter().sum::<f64>() / m;
    let var = sups.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let stderr = (var / m).sqrt();
    let ratio = if bound > 0.0 {
        mean / bound
    } else if mean == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(AuditRow { alpha_cut, empirical: mean, stderr, bound, ratio, pass: mean <= bound + 3.0 * stderr })
}
