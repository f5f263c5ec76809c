//! Lévy models: characteristic triplets, symbols, grid sampling and the
//! Lévy–Itô split into Gaussian, small-jump and big-jump parts.

mod decompose;
pub mod jumps;
pub mod stable;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::check_grid;
use crate::linalg::{is_symmetric, mat_from_rows, psd_sqrt, Mat};
use crate::path::CadlagPath;
use crate::rng::rng_from_seed;

pub use decompose::{decompose, small_jump_factorization, Decomposition, Part, SmallJumpFactorization};
pub use jumps::{JumpDistribution, JumpLaw};

/// How isotropic stable increments are generated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StableSampler {
    /// Exact per-cell increments; no jump record.
    #[default]
    PerCell,
    /// Jumps above `rho_min` drawn explicitly, the rest replaced by a Gaussian
    /// with the matching covariance.
    Series { rho_min: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpSpec {
    None,
    FiniteActivity {
        intensity: f64,
        law: JumpLaw,
    },
    IsotropicStable {
        alpha: f64,
        scale: f64,
        #[serde(default)]
        sampler: StableSampler,
    },
}

/// Characteristic triplet `(a, Q, nu)` on R^d.
///
/// The drift is the drift of the sample paths: the symbol carries no
/// truncation compensator, i.e. for finite activity
/// `Psi(u) = i<a,u> - <Qu,u>/2 + lambda (phi_J(u) - 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyModel {
    pub dim: usize,
    pub drift: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub jump: JumpSpec,
}

/// A jump of a finite-activity (or series) sample.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    /// Exact jump time inside its cell.
    pub time: f64,
    /// Cell index `i`, the jump lies in `(t_i, t_{i+1}]`.
    pub cell: usize,
    pub size: Vec<f64>,
}

impl JumpEvent {
    /// Grid time the jump is attached to on the piecewise-constant path.
    pub fn grid_time(&self, grid: &[f64]) -> f64 {
        grid[self.cell + 1]
    }

    pub fn displacement(&self, grid: &[f64]) -> f64 {
        self.grid_time(grid) - self.time
    }
}

/// Increments of one Lévy path on a grid.
#[derive(Debug, Clone)]
pub struct LevyPathSample {
    pub grid: Vec<f64>,
    pub dim: usize,
    /// Row-major `(n_cells, dim)`.
    pub increments: Vec<f64>,
    /// Gaussian part of every increment, same layout.
    pub gaussian: Vec<f64>,
    /// Gaussian stand-in for series small jumps, same layout.
    pub surrogate: Option<Vec<f64>>,
    pub series_floor: Option<f64>,
    pub jumps: Option<Vec<JumpEvent>>,
    pub decomposition: Option<Decomposition>,
}

impl LevyModel {
    pub fn zero(dim: usize) -> Self {
        LevyModel { dim, drift: vec![0.0; dim], cov: vec![vec![0.0; dim]; dim], jump: JumpSpec::None }
    }

    pub fn brownian(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for k in 0..dim {
            m.cov[k][k] = 1.0;
        }
        m
    }

    pub fn compound_poisson(dim: usize, intensity: f64, law: JumpLaw) -> Self {
        LevyModel { jump: JumpSpec::FiniteActivity { intensity, law }, ..Self::zero(dim) }
    }

    pub fn isotropic_stable(dim: usize, alpha: f64, scale: f64) -> Self {
        LevyModel { jump: JumpSpec::IsotropicStable { alpha, scale, sampler: StableSampler::PerCell }, ..Self::zero(dim) }
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_cov(mut self, cov: Vec<Vec<f64>>) -> Self {
        self.cov = cov;
        self
    }

    pub fn with_stable_sampler(mut self, s: StableSampler) -> Self {
        if let JumpSpec::IsotropicStable { sampler, .. } = &mut self.jump {
            *sampler = s;
        }
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: LevyModel = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn cov_matrix(&self) -> Mat {
        mat_from_rows(&self.cov)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidArgument("model dimension must be positive".into()));
        }
        if self.drift.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.drift.len() });
        }
        if self.cov.len() != d || self.cov.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(format!("covariance must be {d} x {d}")));
        }
        if self.drift.iter().chain(self.cov.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite drift or covariance".into()));
        }
        let q = self.cov_matrix();
        if !is_symmetric(&q, 1e-12) {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        let eig = nalgebra::SymmetricEigen::new(q).eigenvalues;
        let top = eig.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        if eig.iter().any(|l| *l < -1e-12 * top.max(1.0)) {
            return Err(Error::InvalidArgument("covariance has a negative eigenvalue".into()));
        }
        match &self.jump {
            JumpSpec::None => {}
            JumpSpec::FiniteActivity { intensity, law } => {
                if !(*intensity >= 0.0) || !intensity.is_finite() {
                    return Err(Error::InvalidArgument("jump intensity must be finite and nonnegative".into()));
                }
                law.validate()?;
                if law.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: law.dim() });
                }
            }
            JumpSpec::IsotropicStable { alpha, scale, sampler } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::InvalidArgument(format!("stable index must lie in (0, 2), got {alpha}")));
                }
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::InvalidArgument("stable scale must be positive".into()));
                }
                if let StableSampler::Series { rho_min } = sampler {
                    if !(*rho_min > 0.0) {
                        return Err(Error::InvalidArgument("series floor must be positive".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Lévy symbol `Psi(u)`.
    pub fn symbol(&self, u: &[f64]) -> Result<Complex64> {
        Ok(self.symbol_estimate(u)?.0)
    }

    /// Lévy symbol with the Monte Carlo standard error of the jump integral
    /// (zero when a closed form is used).
    pub fn symbol_estimate(&self, u: &[f64]) -> Result<(Complex64, f64)> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        let drift: f64 = self.drift.iter().zip(u).map(|(a, x)| a * x).sum();
        let mut quad = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                quad += u[i] * self.cov[i][j] * u[j];
            }
        }
        let base = Complex64::new(-0.5 * quad, drift);
        let (jump, se) = match &self.jump {
            JumpSpec::None => (Complex64::new(0.0, 0.0), 0.0),
            JumpSpec::FiniteActivity { intensity, law } => {
                if *intensity == 0.0 {
                    (Complex64::new(0.0, 0.0), 0.0)
                } else {
                    let (phi, se) = law.char_fn_estimate(u)?;
                    (*intensity * (phi - 1.0), intensity * se)
                }
            }
            JumpSpec::IsotropicStable { alpha, scale, .. } => {
                let r = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                (Complex64::new(-scale * r.powf(*alpha), 0.0), 0.0)
            }
        };
        Ok((base + jump, se))
    }

    /// Samples increments on `grid`, deterministic in `seed`.
    pub fn sample_path(&self, grid: &[f64], seed: u64) -> Result<LevyPathSample> {
        self.validate()?;
        check_grid(grid)?;
        let mut rng = rng_from_seed(seed);
        self.sample_with(grid, &mut rng)
    }

    fn sample_with<R: Rng>(&self, grid: &[f64], rng: &mut R) -> Result<LevyPathSample> {
        let d = self.dim;
        let n = grid.len() - 1;
        let q = self.cov_matrix();
        let has_gauss = q.iter().any(|x| *x != 0.0);
        let root = if has_gauss { psd_sqrt(&q) } else { DMatrix::zeros(d, d) };
        let mut increments = vec![0.0; n * d];
        let mut gaussian = vec![0.0; n * d];
        let mut jumps_rec: Option<Vec<JumpEvent>> = None;
        let mut surrogate: Option<Vec<f64>> = None;
        let mut series_floor = None;
        let mut z = vec![0.0; d];
        let mut stable_buf = vec![0.0; d];

        let series = match &self.jump {
            JumpSpec::IsotropicStable { alpha, scale, sampler: StableSampler::Series { rho_min } } => {
                series_floor = Some(*rho_min);
                surrogate = Some(vec![0.0; n * d]);
                Some((
                    *alpha,
                    stable::tail_mass(d, *alpha, *scale, *rho_min),
                    stable::truncated_variance(d, *alpha, *scale, *rho_min).sqrt(),
                    *rho_min,
                ))
            }
            _ => None,
        };
        if matches!(self.jump, JumpSpec::FiniteActivity { .. }) || series.is_some() {
            jumps_rec = Some(Vec::new());
        }

        for i in 0..n {
            let dt = grid[i + 1] - grid[i];
            let sdt = dt.sqrt();
            let row = i * d..(i + 1) * d;
            if has_gauss {
                for zk in z.iter_mut() {
                    *zk = StandardNormal.sample(rng);
                }
                for a in 0..d {
                    let mut s = 0.0;
                    for b in 0..d {
                        s += root[(a, b)] * z[b];
                    }
                    gaussian[i * d + a] = s * sdt;
                }
            }
            let inc = &mut increments[row.clone()];
            for a in 0..d {
                inc[a] = self.drift[a] * dt + gaussian[i * d + a];
            }
            match &self.jump {
                JumpSpec::None => {}
                JumpSpec::FiniteActivity { intensity, law } => {
                    let rec = jumps_rec.as_mut().expect("jump record");
                    let count = poisson_count(intensity * dt, rng)?;
                    let mut cell_jumps = Vec::with_capacity(count);
                    for _ in 0..count {
                        let u: f64 = rng.random();
                        let size = law.sample(rng).ok_or(Error::MissingJumpLaw)?;
                        cell_jumps.push(JumpEvent { time: grid[i] + (1.0 - u) * dt, cell: i, size });
                    }
                    push_sorted(cell_jumps, inc, rec);
                }
                JumpSpec::IsotropicStable { alpha, scale, sampler } => match sampler {
                    StableSampler::PerCell => {
                        stable::isotropic_increment(*alpha, *scale, dt, rng, &mut stable_buf);
                        for a in 0..d {
                            inc[a] += stable_buf[a];
                        }
                    }
                    StableSampler::Series { .. } => {
                        let (alpha, rate, sd, rho_min) = series.expect("series parameters");
                        let sur = surrogate.as_mut().expect("surrogate");
                        for a in 0..d {
                            let g: f64 = StandardNormal.sample(rng);
                            sur[i * d + a] = sd * sdt * g;
                            inc[a] += sur[i * d + a];
                        }
                        let rec = jumps_rec.as_mut().expect("jump record");
                        let count = poisson_count(rate * dt, rng)?;
                        let mut cell_jumps = Vec::with_capacity(count);
                        for _ in 0..count {
                            let u: f64 = rng.random();
                            let r = rho_min * (1.0 - rng.random::<f64>()).powf(-1.0 / alpha);
                            let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                            let nrm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                            let size = dir.iter().map(|x| r * x / nrm).collect();
                            cell_jumps.push(JumpEvent { time: grid[i] + (1.0 - u) * dt, cell: i, size });
                        }
                        push_sorted(cell_jumps, inc, rec);
                    }
                },
            }
        }
        Ok(LevyPathSample {
            grid: grid.to_vec(),
            dim: d,
            increments,
            gaussian,
            surrogate,
            series_floor,
            jumps: jumps_rec,
            decomposition: None,
        })
    }
}

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let p = Poisson::new(mean).map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
    Ok(p.sample(rng) as usize)
}

fn push_sorted(mut cell: Vec<JumpEvent>, inc: &mut [f64], rec: &mut Vec<JumpEvent>) {
    cell.sort_by(|a, b| a.time.total_cmp(&b.time));
    for j in cell {
        for (x, s) in inc.iter_mut().zip(&j.size) {
            *x += s;
        }
        rec.push(j);
    }
}

/// Free-function form of [`LevyModel::sample_path`].
pub fn sample_path(model: &LevyModel, grid: &[f64], seed: u64) -> Result<LevyPathSample> {
    model.sample_path(grid, seed)
}

/// Free-function form of [`LevyModel::symbol`].
pub fn levy_symbol(model: &LevyModel, u: &[f64]) -> Result<Complex64> {
    model.symbol(u)
}

impl LevyPathSample {
    pub fn n_cells(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn increment(&self, i: usize) -> &[f64] {
        &self.increments[i * self.dim..(i + 1) * self.dim]
    }

    /// Running sums `L(t_0) = 0, L(t_{i+1}) = L(t_i) + dL_i`, row-major.
    pub fn values(&self) -> Vec<f64> {
        let d = self.dim;
        let mut v = vec![0.0; self.grid.len() * d];
        for i in 0..self.n_cells() {
            for a in 0..d {
                v[(i + 1) * d + a] = v[i * d + a] + self.increments[i * d + a];
            }
        }
        v
    }

    pub fn terminal(&self) -> Vec<f64> {
        let v = self.values();
        v[v.len() - self.dim..].to_vec()
    }

    /// Piecewise-constant right-continuous path of the running sums.
    pub fn path(&self) -> CadlagPath {
        let d = self.dim;
        let right = self.values();
        let mut left = right.clone();
        for i in 1..self.grid.len() {
            left[i * d..(i + 1) * d].copy_from_slice(&right[(i - 1) * d..i * d]);
        }
        CadlagPath::new(d, self.grid.clone(), left, right).expect("sample grid is valid")
    }

    /// Pushes the sample forward through `x -> M x` (`M` row-major, `rows x dim`).
    /// The decomposition is dropped.
    pub fn map_linear(&self, m: &[f64], rows: usize) -> Result<LevyPathSample> {
        let d = self.dim;
        if rows == 0 || m.len() != rows * d {
            return Err(Error::DimensionMismatch { expected: rows * d, got: m.len() });
        }
        let apply = |x: &[f64]| -> Vec<f64> {
            let n = x.len() / d;
            let mut out = vec![0.0; n * rows];
            for i in 0..n {
                for r in 0..rows {
                    out[i * rows + r] = (0..d).map(|c| m[r * d + c] * x[i * d + c]).sum();
                }
            }
            out
        };
        Ok(LevyPathSample {
            grid: self.grid.clone(),
            dim: rows,
            increments: apply(&self.increments),
            gaussian: apply(&self.gaussian),
            surrogate: self.surrogate.as_ref().map(|s| apply(s)),
            series_floor: self.series_floor,
            jumps: self.jumps.as_ref().map(|js| {
                js.iter().map(|j| JumpEvent { time: j.time, cell: j.cell, size: apply(&j.size) }).collect()
            }),
            decomposition: None,
        })
    }
}
