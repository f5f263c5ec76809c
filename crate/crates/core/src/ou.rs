//! Ornstein–Uhlenbeck and integrated OU processes, for diagonal semigroups
//! `S(t) e_k = exp(-lambda_k t) e_k` and for small matrix generators.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::convolution::{convolve, Kernel, ScalarFn};
use crate::error::{Error, Result};
use crate::grid::{uniform_grid, uniform_step};
use crate::levy::{LevyModel, LevyPathSample};
use crate::linalg::{mat_from_rows, Mat};
use crate::path::CadlagPath;

/// `dY = gamma A Y dt + G dL` with `A e_k = -lambda_k e_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalOuSpec {
    pub lambdas: Vec<f64>,
    pub gamma: f64,
    /// `d x d_U`, row-major rows.
    pub g: Vec<Vec<f64>>,
    pub horizon: f64,
}

impl DiagonalOuSpec {
    /// `G = I`.
    pub fn identity_noise(lambdas: Vec<f64>, gamma: f64, horizon: f64) -> Self {
        let d = lambdas.len();
        let g = (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        DiagonalOuSpec { lambdas, gamma, g, horizon }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        DiagonalOuSpec { gamma, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.g.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument("lambdas must be nonempty, positive and finite".into()));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument("gamma must be positive".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        let du = self.noise_dim();
        if self.g.len() != self.dim() || du == 0 || self.g.iter().any(|r| r.len() != du) {
            return Err(Error::InvalidArgument(format!("G must be {} x d_U", self.dim())));
        }
        Ok(())
    }

    pub fn g_matrix(&self) -> Mat {
        mat_from_rows(&self.g)
    }

    /// Row-major `G` for [`LevyPathSample::map_linear`].
    fn g_flat(&self) -> Vec<f64> {
        self.g.iter().flatten().copied().collect()
    }

    /// Applies `A` coordinatewise: coordinate `k` is multiplied by `-lambda_k`.
    pub fn apply_generator(&self, path: &CadlagPath) -> Result<CadlagPath> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for k in 0..d {
            m[k * d + k] = -self.lambdas[k];
        }
        path.map_linear(&m, d)
    }

    fn diagonal_kernel(&self, phis: Vec<ScalarFn>) -> Result<Kernel> {
        Kernel::diagonal(phis, self.g_matrix().transpose(), (-1.0, self.horizon))
    }
}

/// The kernel of `A X_gamma` and its limit, both on `[-1, T]`.
#[derive(Debug, Clone)]
pub struct OuKernels {
    /// `phi_gamma^k(t) = 1_{[0,T]}(t) (exp(-lambda_k gamma t) - 1)`.
    pub gamma: Kernel,
    /// `phi^k(t) = -1_{[0,T]}(t)`.
    pub limit: Kernel,
}

pub fn phi_gamma(lambda: f64, gamma: f64) -> ScalarFn {
    Arc::new(move |t: f64| if t < 0.0 { 0.0 } else { (-lambda * gamma * t).exp_m1() })
}

pub fn phi_limit() -> ScalarFn {
    Arc::new(|t: f64| if t < 0.0 { 0.0 } else { -1.0 })
}

pub fn ou_kernel(spec: &DiagonalOuSpec) -> Result<OuKernels> {
    spec.validate()?;
    let gamma = spec.diagonal_kernel(spec.lambdas.iter().map(|l| phi_gamma(*l, spec.gamma)).collect())?;
    let limit = spec.diagonal_kernel(vec![phi_limit(); spec.dim()])?;
    Ok(OuKernels { gamma, limit })
}

/// Semigroup kernel `S_gamma(t) G` on `[0, T]`, the integrand of `Y_gamma`.
pub fn semigroup_kernel(spec: &DiagonalOuSpec) -> Result<Kernel> {
    spec.validate()?;
    let phis = spec
        .lambdas
        .iter()
        .map(|l| {
            let r = l * spec.gamma;
            Arc::new(move |t: f64| (-r * t).exp()) as ScalarFn
        })
        .collect();
    Kernel::diagonal(phis, spec.g_matrix().transpose(), (0.0, spec.horizon))
}

/// `phi_gamma^k` (or the limit) as a càdlàg path on `[-1, T]`, sampled on a
/// uniform grid of `steps` cells refined near the jump at 0.
pub fn phi_path(spec: &DiagonalOuSpec, k: usize, limit: bool, steps: usize) -> Result<CadlagPath> {
    spec.validate()?;
    let t1 = spec.horizon;
    let mut times = uniform_grid(-1.0, t1, steps)?;
    if !times.contains(&0.0) {
        times.push(0.0);
    }
    if !limit {
        let scale = 1.0 / (spec.lambdas[k] * spec.gamma);
        for j in 1..=400 {
            let t = scale * 0.05 * j as f64;
            if t < t1 {
                times.push(t);
            }
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let phi = if limit { phi_limit() } else { phi_gamma(spec.lambdas[k], spec.gamma) };
    let right: Vec<f64> = times.iter().map(|t| phi(*t)).collect();
    let mut left = right.clone();
    for (i, t) in times.iter().enumerate() {
        if *t == 0.0 && i > 0 {
            left[i] = 0.0;
        }
    }
    CadlagPath::new(1, times, left, right)
}

fn check_noise(spec: &DiagonalOuSpec, sample: &LevyPathSample) -> Result<()> {
    spec.validate()?;
    if sample.dim != spec.noise_dim() {
        return Err(Error::DimensionMismatch { expected: spec.noise_dim(), got: sample.dim });
    }
    uniform_step(&sample.grid)?;
    let span = sample.grid[sample.grid.len() - 1] - sample.grid[0];
    if span > spec.horizon * (1.0 + 1e-12) {
        return Err(Error::GridMismatch(format!("sample spans {span}, beyond the horizon {}", spec.horizon)));
    }
    Ok(())
}

/// `Y_gamma` by the exact exponential recursion
/// `Y_k(t_{i+1}) = exp(-gamma lambda_k dt) (Y_k(t_i) + (G dL_i)_k)`.
///
/// The path jumps by `G dL_i` at `t_{i+1}`, matching [`convolve`] of the
/// semigroup kernel.
pub fn simulate_ou(spec: &DiagonalOuSpec, sample: &LevyPathSample) -> Result<CadlagPath> {
    check_noise(spec, sample)?;
    let k = sample.map_linear(&spec.g_flat(), spec.dim())?;
    let d = spec.dim();
    let n = k.n_cells();
    let mut right = vec![0.0; (n + 1) * d];
    let mut left = vec![0.0; (n + 1) * d];
    for (c, lam) in spec.lambdas.iter().enumerate() {
        let mut y = 0.0;
        for i in 0..n {
            let dt = k.grid[i + 1] - k.grid[i];
            let e = (-spec.gamma * lam * dt).exp();
            let z = k.increments[i * d + c];
            y = e * (y + z);
            right[(i + 1) * d + c] = y;
            left[(i + 1) * d + c] = y - z;
        }
    }
    CadlagPath::new(d, k.grid.clone(), left, right)
}

/// `X_gamma(t) = gamma int_0^t Y_gamma(s) ds`, integrating the piecewise-linear
/// path exactly (trapezoid with one-sided values).
pub fn integrated_ou(spec: &DiagonalOuSpec, y: &CadlagPath) -> Result<CadlagPath> {
    if y.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: y.dim() });
    }
    let d = y.dim();
    let times = y.times().to_vec();
    let mut vals = vec![vec![0.0; d]; times.len()];
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        for c in 0..d {
            vals[i][c] = vals[i - 1][c] + spec.gamma * 0.5 * h * (y.right(i - 1)[c] + y.left(i)[c]);
        }
    }
    CadlagPath::polyline(times, &vals)
}

/// `A X_gamma = Y_gamma - K` with `K = G L`, in `O(n d)`. Continuous, equal to
/// [`convolve`] of the `ou_kernel` up to rounding.
pub fn ax_gamma(spec: &DiagonalOuSpec, sample: &LevyPathSample) -> Result<CadlagPath> {
    let y = simulate_ou(spec, sample)?;
    let d = spec.dim();
    let k = sample.map_linear(&spec.g_flat(), d)?.path();
    let mut vals = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        vals.push((0..d).map(|c| y.right(i)[c] - k.right(i)[c]).collect::<Vec<f64>>());
    }
    CadlagPath::polyline(y.times().to_vec(), &vals)
}

/// The limit `-K = -G L` as a piecewise-constant path.
pub fn limit_path(spec: &DiagonalOuSpec, sample: &LevyPathSample) -> Result<CadlagPath> {
    check_noise(spec, sample)?;
    Ok(sample.map_linear(&spec.g_flat(), spec.dim())?.path().scale(-1.0))
}

/// Generator matrix `A` for `AX_gamma(t) = int_0^t (Id - exp(-gamma A (t-s))) dL(s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixOuSpec {
    pub a: Vec<Vec<f64>>,
    pub gamma: f64,
    pub horizon: f64,
}

impl MatrixOuSpec {
    pub fn new(a: Vec<Vec<f64>>, gamma: f64, horizon: f64) -> Self {
        MatrixOuSpec { a, gamma, horizon }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || self.a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("A must be square and nonempty".into()));
        }
        if self.a.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("A has non-finite entries".into()));
        }
        if !(self.gamma > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument("gamma and horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn a_matrix(&self) -> Mat {
        mat_from_rows(&self.a)
    }
}

/// The introduction's examples `A_1 .. A_4`.
pub fn intro_matrix(id: usize) -> Result<Vec<Vec<f64>>> {
    Ok(match id {
        1 => vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        2 => vec![vec![1.0, 0.0], vec![0.0, 3.0]],
        3 => vec![vec![1.0, 1.0], vec![0.0, 1.0]],
        4 => vec![vec![1.0, 1.0], vec![-1.0, 1.0]],
        _ => return Err(Error::InvalidArgument(format!("matrix id must be 1..4, got {id}"))),
    })
}

/// `exp(-gamma A s)` with an overflow check.
pub fn semigroup_matrix(a: &Mat, gamma: f64, s: f64) -> Result<Mat> {
    let e = (a * (-gamma * s)).exp();
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::MatrixExpOverflow(format!("exp(-gamma A s) at gamma = {gamma}, s = {s} is not finite")));
    }
    Ok(e)
}

/// `s -> Id - exp(-gamma A s)` on `[0, T]`.
pub fn intro_matrix_kernel(spec: &MatrixOuSpec) -> Result<Kernel> {
    spec.validate()?;
    let a = spec.a_matrix();
    let d = spec.dim();
    let gamma = spec.gamma;
    // probe the sampling grid so that overflow surfaces here rather than in a closure
    for s in uniform_grid(0.0, spec.horizon, 64)? {
        semigroup_matrix(&a, gamma, s)?;
    }
    Kernel::general(d, d, (0.0, spec.horizon), move |s| {
        DMatrix::identity(d, d) - (&a * (-gamma * s)).exp()
    })
}

/// `A X_gamma` by the recursion `Z_{i+1} = E (Z_i + dL_i)`, `E = exp(-gamma A dt)`,
/// `A X_gamma(t_i) = L(t_i) - Z_i`; `O(n d^2)` instead of a full convolution.
pub fn matrix_ax_gamma(spec: &MatrixOuSpec, sample: &LevyPathSample) -> Result<CadlagPath> {
    spec.validate()?;
    let d = spec.dim();
    if sample.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: sample.dim });
    }
    let h = uniform_step(&sample.grid)?;
    let e = semigroup_matrix(&spec.a_matrix(), spec.gamma, h)?;
    let n = sample.n_cells();
    let mut z = vec![0.0; d];
    let mut l = vec![0.0; d];
    let mut vals = vec![vec![0.0; d]; n + 1];
    for i in 0..n {
        let inc = sample.increment(i);
        let w: Vec<f64> = (0..d).map(|c| z[c] + inc[c]).collect();
        for r in 0..d {
            z[r] = (0..d).map(|c| e[(r, c)] * w[c]).sum();
            l[r] += inc[r];
            vals[i + 1][r] = l[r] - z[r];
        }
    }
    CadlagPath::polyline(sample.grid.clone(), &vals)
}

/// Parameters of one Figure-1 panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure1Config {
    pub gamma: f64,
    pub alpha: f64,
    pub scale: f64,
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Figure1Config { gamma: 1000.0, alpha: 1.5, scale: 1.0, horizon: 1.0, steps: 2048, seed: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Figure1Panel {
    pub matrix_id: usize,
    pub ax_gamma: CadlagPath,
    pub levy: CadlagPath,
}

/// `A_j X_gamma` driven by a planar isotropic stable process, through
/// [`intro_matrix_kernel`] and [`convolve`]. The same seed gives the same driver
/// for every `j`.
pub fn figure1_paths(matrix_id: usize, cfg: &Figure1Config) -> Result<Figure1Panel> {
    let spec = MatrixOuSpec::new(intro_matrix(matrix_id)?, cfg.gamma, cfg.horizon);
    let grid = uniform_grid(0.0, cfg.horizon, cfg.steps)?;
    let sample = LevyModel::isotropic_stable(2, cfg.alpha, cfg.scale).sample_path(&grid, cfg.seed)?;
    let kernel = intro_matrix_kernel(&spec)?;
    Ok(Figure1Panel { matrix_id, ax_gamma: convolve(&kernel, &sample)?, levy: sample.path() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpLaw;

    #[test]
    fn kernel_values() {
        let spec = DiagonalOuSpec::identity_noise(vec![1.0, 3.0], 50.0, 1.0);
        let k = ou_kernel(&spec).unwrap();
        let m = k.gamma.eval(0.0);
        assert!(m.iter().all(|x| *x == 0.0));
        assert_eq!(k.limit.eval(0.5)[(1, 1)], -1.0);
        assert_eq!(k.limit.eval(-0.5)[(1, 1)], 0.0);
        for s in [0.01, 0.3, 1.0] {
            let v = k.gamma.eval(s);
            assert!(v[(0, 0)] >= -1.0 && v[(0, 0)] < 0.0 && v[(0, 1)] == 0.0);
        }
    }

    #[test]
    fn unit_jump_response() {
        let spec = DiagonalOuSpec::identity_noise(vec![2.0], 3.0, 1.0);
        let grid = uniform_grid(0.0, 1.0, 100).unwrap();
        let m = LevyModel::compound_poisson(1, 2.0, JumpLaw::PointMass { at: vec![1.0] });
        let s = (0..).map(|seed| m.sample_path(&grid, seed).unwrap()).find(|s| s.jumps.as_ref().unwrap().len() == 1).unwrap();
        let j = &s.jumps.as_ref().unwrap()[0];
        // left-point rule: the increment of cell c is weighted from t_c and shows from t_{c+1}
        let (tc, tau) = (grid[j.cell], j.grid_time(&grid));
        let y = simulate_ou(&spec, &s).unwrap();
        for (i, t) in grid.iter().enumerate() {
            let want = if *t >= tau { (-6.0 * (t - tc)).exp() } else { 0.0 };
            assert!((y.right(i)[0] - want).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn recursion_matches_convolution() {
        let spec = DiagonalOuSpec {
            lambdas: vec![1.0, 3.0],
            gamma: 20.0,
            g: vec![vec![1.0, 0.5], vec![-0.2, 1.0]],
            horizon: 1.0,
        };
        let grid = uniform_grid(0.0, 1.0, 256).unwrap();
        let s = LevyModel::brownian(2).sample_path(&grid, 4).unwrap();
        let a = simulate_ou(&spec, &s).unwrap();
        let b = convolve(&semigroup_kernel(&spec).unwrap(), &s).unwrap();
        assert!(a.sup_distance(&b).unwrap() < 1e-12);
        let ax = ax_gamma(&spec, &s).unwrap();
        let ax2 = convolve(&ou_kernel(&spec).unwrap().gamma, &s).unwrap();
        assert!(ax.sup_distance(&ax2).unwrap() < 1e-12);
    }

    #[test]
    fn intro_kernels() {
        let a1 = MatrixOuSpec::new(intro_matrix(1).unwrap(), 7.0, 1.0);
        let k = intro_matrix_kernel(&a1).unwrap();
        let m = k.eval(0.2);
        assert!((m[(0, 0)] - (1.0 - (-1.4f64).exp())).abs() < 1e-14 && m[(0, 1)].abs() < 1e-15);
        assert!(k.eval(0.0).iter().all(|x| *x == 0.0));
        let a4 = intro_matrix(4).unwrap();
        let (g, s) = (3.0, 0.7);
        let e = semigroup_matrix(&mat_from_rows(&a4), g, s).unwrap();
        let (c, sn, sc) = ((g * s).cos(), (g * s).sin(), (-g * s).exp());
        let want = [[sc * c, -sc * sn], [sc * sn, sc * c]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[(i, j)] - want[i][j]).abs() < 1e-10);
            }
        }
        let bad = MatrixOuSpec::new(vec![vec![-1.0]], 1e3, 1.0);
        assert!(matches!(intro_matrix_kernel(&bad), Err(Error::MatrixExpOverflow(_))));
    }

    #[test]
    fn matrix_recursion_matches_convolution() {
        let spec = MatrixOuSpec::new(intro_matrix(4).unwrap(), 30.0, 1.0);
        let grid = uniform_grid(0.0, 1.0, 200).unwrap();
        let s = LevyModel::isotropic_stable(2, 1.5, 1.0).sample_path(&grid, 8).unwrap();
        let a = matrix_ax_gamma(&spec, &s).unwrap();
        let b = convolve(&intro_matrix_kernel(&spec).unwrap(), &s).unwrap();
        let scale = 1.0 + a.sup_distance(&CadlagPath::constant(0.0, 1.0, &[0.0, 0.0]).unwrap()).unwrap();
        assert!(a.sup_distance(&b).unwrap() < 1e-11 * scale);
    }
}
