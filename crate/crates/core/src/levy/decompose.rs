//! Lévy–Itô split of a sample and the small-jump covariance `R_alpha`.

use nalgebra::DMatrix;

use super::{stable, JumpEvent, JumpLaw, JumpSpec, LevyModel, LevyPathSample, StableSampler};
use crate::error::{Error, Result};
use crate::linalg::{sorted_eigen, Mat, EIGEN_TOL};

/// Per-increment split `dL = dW + dX + dY` at threshold `alpha_cut`.
///
/// `dW` is the Gaussian part, `dX` the compensated jumps of norm at most the
/// cut, `dY` the larger jumps plus the drift `b_alpha`. Arrays are row-major
/// `(n_cells, dim)` like the sample increments. `(dW + dX) + dY` equals `dL`
/// bit for bit; to get there `dW` and `dX` may sit a few ulps off their
/// nominal values.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub alpha_cut: f64,
    pub b_alpha: Vec<f64>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub big_jumps: Vec<JumpEvent>,
    /// True when part of `dX` is a Gaussian surrogate (series stable sampler).
    pub gaussian_small_jumps: bool,
    /// Coordinates where `(dW + dX) + dY` could not be made to equal `dL` bit for bit.
    pub inexact: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    W,
    X,
    Y,
}

impl Decomposition {
    pub fn part(&self, p: Part) -> &[f64] {
        match p {
            Part::W => &self.w,
            Part::X => &self.x,
            Part::Y => &self.y,
        }
    }
}

impl LevyPathSample {
    /// A sample whose increments are one part of the decomposition.
    pub fn part_sample(&self, p: Part) -> Result<LevyPathSample> {
        let dec = self
            .decomposition
            .as_ref()
            .ok_or_else(|| Error::DecompositionUnavailable("sample has not been decomposed".into()))?;
        let inc = dec.part(p).to_vec();
        let d = self.dim;
        Ok(LevyPathSample {
            grid: self.grid.clone(),
            dim: d,
            gaussian: if p == Part::W { inc.clone() } else { vec![0.0; inc.len()] },
            increments: inc,
            surrogate: None,
            series_floor: None,
            jumps: None,
            decomposition: None,
        })
    }
}

/// `y` with `s + y == l` exactly, searched over a few ulps around `l - s`.
fn reconcile(s: f64, l: f64) -> (f64, bool) {
    let mut y = l - s;
    for _ in 0..64 {
        let r = s + y;
        if r == l {
            return (y, true);
        }
        y = if r < l { y.next_up() } else { y.next_down() };
    }
    (l - s, false)
}

/// `(x, y)` with `(w + x) + y == l`, moving `w + x` by a few ulps when no `y` works.
fn split_exact(w: f64, x: f64, l: f64) -> (f64, f64, bool) {
    let s = w + x;
    let (mut up, mut down) = (s, s);
    for i in 0..1024 {
        let t = if i % 2 == 0 { up } else { down };
        let (xt, ok_x) = if t == s { (x, true) } else { reconcile(w, t) };
        if ok_x {
            let (y, ok) = reconcile(t, l);
            if ok {
                return (xt, y, true);
            }
        }
        if i % 2 == 0 {
            up = up.next_up();
        } else {
            down = down.next_down();
        }
    }
    (x, l - s, false)
}

/// As [`split_exact`], falling back to ulp moves of `w` on a parity clash.
fn split_exact3(w: f64, x: f64, l: f64) -> (f64, f64, f64, bool) {
    let (mut up, mut down) = (w, w);
    for i in 0..16 {
        let wi = if i % 2 == 0 { up } else { down };
        let (xi, yi, ok) = split_exact(wi, x, l);
        if ok {
            return (wi, xi, yi, true);
        }
        if i % 2 == 0 {
            up = up.next_up();
        } else {
            down = down.next_down();
        }
    }
    (w, x, l - (w + x), false)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lévy–Itô decomposition of `sample` at threshold `alpha_cut`.
///
/// Needs an explicit jump record: finite-activity samples, or stable samples
/// drawn with [`StableSampler::Series`] and a floor not above the cut.
pub fn decompose(sample: &LevyPathSample, model: &LevyModel, alpha_cut: f64) -> Result<LevyPathSample> {
    if !(alpha_cut > 0.0) || !alpha_cut.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha_cut must be positive, got {alpha_cut}")));
    }
    if sample.dim != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, got: sample.dim });
    }
    let d = sample.dim;
    let n = sample.n_cells();
    let (compensator, flagged) = match &model.jump {
        JumpSpec::None => (vec![0.0; d], false),
        JumpSpec::FiniteActivity { intensity, law } => {
            let (m1, _) = law.truncated_moments(alpha_cut)?;
            (m1.iter().map(|m| intensity * m).collect(), false)
        }
        JumpSpec::IsotropicStable { sampler: StableSampler::Series { rho_min }, .. } => {
            if *rho_min > alpha_cut {
                return Err(Error::DecompositionUnavailable(format!(
                    "series floor {rho_min} exceeds the cut {alpha_cut}"
                )));
            }
            (vec![0.0; d], true)
        }
        JumpSpec::IsotropicStable { .. } => {
            return Err(Error::DecompositionUnavailable("per-cell stable increments carry no jump record".into()))
        }
    };
    let empty = Vec::new();
    let jumps = match (&model.jump, &sample.jumps) {
        (JumpSpec::None, _) => &empty,
        (_, Some(j)) => j,
        (_, None) => return Err(Error::DecompositionUnavailable("sample has no jump record".into())),
    };

    let mut small = vec![0.0; n * d];
    if let Some(s) = &sample.surrogate {
        small.copy_from_slice(s);
    }
    let mut big_jumps = Vec::new();
    for j in jumps {
        if norm(&j.size) > alpha_cut {
            big_jumps.push(j.clone());
        } else {
            for a in 0..d {
                small[j.cell * d + a] += j.size[a];
            }
        }
    }
    let mut w = vec![0.0; n * d];
    let mut x = vec![0.0; n * d];
    let mut y = vec![0.0; n * d];
    let mut inexact = 0;
    for i in 0..n {
        let dt = sample.grid[i + 1] - sample.grid[i];
        for a in 0..d {
            let k = i * d + a;
            let (wk, xk, yk, ok) = split_exact3(sample.gaussian[k], small[k] - compensator[a] * dt, sample.increments[k]);
            w[k] = wk;
            x[k] = xk;
            y[k] = yk;
            inexact += usize::from(!ok);
        }
    }
    let b_alpha = model.drift.iter().zip(&compensator).map(|(a, c)| a + c).collect();
    let mut out = sample.clone();
    out.decomposition = Some(Decomposition {
        alpha_cut,
        b_alpha,
        w,
        x,
        y,
        big_jumps,
        gaussian_small_jumps: flagged,
        inexact,
    });
    Ok(out)
}

/// Covariance `R_alpha` of the small-jump part at unit time and its eigenpairs.
#[derive(Debug, Clone)]
pub struct SmallJumpFactorization {
    pub alpha_cut: f64,
    pub r_alpha: Mat,
    /// `(sigma_k^2, h_k)` with `sigma_k^2 > 0`, decreasing.
    pub factors: Vec<(f64, Vec<f64>)>,
    /// Negative eigenvalues clipped to zero.
    pub clipped: usize,
    /// True when `R_alpha` came from Monte Carlo rather than a closed form.
    pub monte_carlo: bool,
}

impl SmallJumpFactorization {
    /// `<R_alpha u, u>`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let d = self.r_alpha.nrows();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += u[i] * self.r_alpha[(i, j)] * u[j];
            }
        }
        s
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.factors.first().map_or(0.0, |f| f.0)
    }

    /// Factorization with every `sigma_k` multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.r_alpha *= c * c;
        for f in &mut out.factors {
            f.0 *= c * c;
        }
        out
    }

    /// Builds a factorization from explicit `(sigma_k^2, h_k)` pairs.
    pub fn from_factors(alpha_cut: f64, factors: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let d = factors.first().map_or(0, |f| f.1.len());
        let mut r = DMatrix::zeros(d, d);
        for (s2, h) in &factors {
            if h.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: h.len() });
            }
            for i in 0..d {
                for j in 0..d {
                    r[(i, j)] += s2 * h[i] * h[j];
                }
            }
        }
        Ok(SmallJumpFactorization { alpha_cut, r_alpha: r, factors, clipped: 0, monte_carlo: false })
    }
}

pub fn small_jump_factorization(model: &LevyModel, alpha_cut: f64) -> Result<SmallJumpFactorization> {
    if !(alpha_cut > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha_cut must be positive, got {alpha_cut}")));
    }
    let d = model.dim;
    let (r, mc) = match &model.jump {
        JumpSpec::None => (DMatrix::zeros(d, d), false),
        JumpSpec::FiniteActivity { intensity, law } => {
            let (_, m2) = law.truncated_moments(alpha_cut)?;
            let mc = matches!(law, JumpLaw::Gaussian { .. } | JumpLaw::Custom(_));
            (m2 * *intensity, mc)
        }
        JumpSpec::IsotropicStable { alpha, scale, .. } => {
            (DMatrix::identity(d, d) * stable::truncated_variance(d, *alpha, *scale, alpha_cut), false)
        }
    };
    let (pairs, clipped) = sorted_eigen(&r);
    let top = pairs.first().map_or(0.0, |p| p.0);
    let factors = pairs.into_iter().filter(|p| p.0 > EIGEN_TOL * top.max(1.0) && p.0 > 0.0).collect();
    Ok(SmallJumpFactorization { alpha_cut, r_alpha: r, factors, clipped, monte_carlo: mc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_grid;

    #[test]
    fn reconcile_is_exact() {
        let (y, ok) = reconcile(0.1 + 0.2, 0.7);
        assert!(ok);
        assert_eq!(0.1 + 0.2 + y, 0.7);
    }

    #[test]
    fn point_mass_factor() {
        let m = LevyModel::compound_poisson(2, 1.0, JumpLaw::PointMass { at: vec![0.3, 0.4] });
        let f = small_jump_factorization(&m, 1.0).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert!((f.factors[0].0 - 0.25).abs() < 1e-15);
        assert!((f.quadratic_form(&[1.0, 2.0]) - 1.1f64.powi(2)).abs() < 1e-14);
        let none = small_jump_factorization(&m, 0.4).unwrap();
        assert!(none.factors.is_empty());
    }

    #[test]
    fn single_big_jump_routes_to_y() {
        let m = LevyModel::compound_poisson(1, 3.0, JumpLaw::PointMass { at: vec![2.0] });
        let g = uniform_grid(0.0, 1.0, 16).unwrap();
        let s = (0..).map(|seed| m.sample_path(&g, seed).unwrap()).find(|s| s.jumps.as_ref().unwrap().len() == 1).unwrap();
        let dec = decompose(&s, &m, 1.0).unwrap();
        let dd = dec.decomposition.as_ref().unwrap();
        assert_eq!(dd.big_jumps, *s.jumps.as_ref().unwrap());
        assert!(dd.x.iter().all(|v| *v == 0.0));
        assert_eq!(dd.inexact, 0);
        assert_eq!(dd.b_alpha, vec![0.0]);
        assert!(decompose(&s, &m, 0.0).is_err());
    }
}
