//! Jump-size distributions for finite-activity Lévy models.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat_from_rows, psd_sqrt, Mat};
use crate::rng::rng_from_seed;

/// Monte Carlo sample count used when a law has no closed form.
pub const MC_SAMPLES: usize = 200_000;
const MC_SEED: u64 = 0x5eed_1e5;

/// User-supplied jump law. Both methods are optional; a law that implements
/// neither cannot be used.
pub trait JumpDistribution: Send + Sync {
    fn dim(&self) -> usize;
    fn sample(&self, _rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        None
    }
    fn char_fn(&self, _u: &[f64]) -> Option<Complex64> {
        None
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    PointMass { at: Vec<f64> },
    Atoms { atoms: Vec<Vec<f64>>, weights: Vec<f64> },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    UniformBall { dim: usize, radius: f64 },
    #[serde(skip)]
    Custom(Arc<dyn JumpDistribution>),
}

impl fmt::Debug for JumpLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpLaw::PointMass { at } => f.debug_struct("PointMass").field("at", at).finish(),
            JumpLaw::Atoms { atoms, weights } => f.debug_struct("Atoms").field("atoms", atoms).field("weights", weights).finish(),
            JumpLaw::Gaussian { mean, cov } => f.debug_struct("Gaussian").field("mean", mean).field("cov", cov).finish(),
            JumpLaw::UniformBall { dim, radius } => f.debug_struct("UniformBall").field("dim", dim).field("radius", radius).finish(),
            JumpLaw::Custom(c) => write!(f, "Custom(dim = {})", c.dim()),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `E exp(i <u, J>)` for `J` uniform in the ball of radius `radius` in R^d,
/// via the marginal density of one coordinate (`s = sin(theta)` substitution).
pub fn uniform_ball_char(d: usize, radius: f64, u: &[f64]) -> f64 {
    let x = radius * norm(u);
    if x == 0.0 {
        return 1.0;
    }
    match d {
        1 => x.sin() / x,
        3 => 3.0 * (x.sin() - x * x.cos()) / (x * x * x),
        _ => {
            let n = 2048;
            let h = PI / n as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..n {
                let th = -PI / 2.0 + (k as f64 + 0.5) * h;
                let w = th.cos().powi(d as i32);
                num += (x * th.sin()).cos() * w;
                den += w;
            }
            num / den
        }
    }
}

impl JumpLaw {
    pub fn dim(&self) -> usize {
        match self {
            JumpLaw::PointMass { at } => at.len(),
            JumpLaw::Atoms { atoms, .. } => atoms.first().map_or(0, Vec::len),
            JumpLaw::Gaussian { mean, .. } => mean.len(),
            JumpLaw::UniformBall { dim, .. } => *dim,
            JumpLaw::Custom(c) => c.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidArgument("jump law has dimension 0".into()));
        }
        match self {
            JumpLaw::Atoms { atoms, weights } => {
                if atoms.len() != weights.len() || atoms.is_empty() {
                    return Err(Error::InvalidArgument("atoms and weights must be nonempty and of equal length".into()));
                }
                if atoms.iter().any(|a| a.len() != d) {
                    return Err(Error::InvalidArgument("atoms of unequal dimension".into()));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidArgument("weights must be nonnegative with positive sum".into()));
                }
            }
            JumpLaw::Gaussian { cov, .. } => {
                if cov.len() != d || cov.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidArgument("jump covariance must be d x d".into()));
                }
            }
            JumpLaw::UniformBall { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::InvalidArgument("ball radius must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }

    fn normalized_weights(weights: &[f64]) -> Vec<f64> {
        let s: f64 = weights.iter().sum();
        weights.iter().map(|w| w / s).collect()
    }

    /// Draws one jump. Returns `None` only for a custom law without a sampler.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<Vec<f64>> {
        match self {
            JumpLaw::PointMass { at } => Some(at.clone()),
            JumpLaw::Atoms { atoms, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (a, w) in atoms.iter().zip(weights) {
                    if u < *w {
                        return Some(a.clone());
                    }
                    u -= w;
                }
                atoms.last().cloned()
            }
            JumpLaw::Gaussian { mean, cov } => {
                let root = psd_sqrt(&mat_from_rows(cov));
                let z: Vec<f64> = (0..mean.len()).map(|_| StandardNormal.sample(rng)).collect();
                Some(mean.iter().enumerate().map(|(i, m)| m + (0..z.len()).map(|j| root[(i, j)] * z[j]).sum::<f64>()).collect())
            }
            JumpLaw::UniformBall { dim, radius } => {
                let g: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(rng)).collect();
                let n = norm(&g);
                let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
                Some(g.iter().map(|x| r * x / n).collect())
            }
            JumpLaw::Custom(c) => c.sample(rng),
        }
    }

    /// Closed-form characteristic function, when one is available.
    pub fn char_fn(&self, u: &[f64]) -> Option<Complex64> {
        match self {
            JumpLaw::PointMass { at } => Some(Complex64::new(0.0, dot(u, at)).exp()),
            JumpLaw::Atoms { atoms, weights } => Some(
                atoms
                    .iter()
                    .zip(Self::normalized_weights(weights))
                    .map(|(a, w)| w * Complex64::new(0.0, dot(u, a)).exp())
                    .sum(),
            ),
            JumpLaw::Gaussian { mean, cov } => {
                let quad: f64 = (0..u.len()).map(|i| (0..u.len()).map(|j| u[i] * cov[i][j] * u[j]).sum::<f64>()).sum();
                Some(Complex64::new(-0.5 * quad, dot(u, mean)).exp())
            }
            JumpLaw::UniformBall { dim, radius } => Some(Complex64::new(uniform_ball_char(*dim, *radius, u), 0.0)),
            JumpLaw::Custom(c) => c.char_fn(u),
        }
    }

    /// Characteristic function with a Monte Carlo fallback; the second entry is
    /// the standard error (zero for closed forms).
    pub fn char_fn_estimate(&self, u: &[f64]) -> Result<(Complex64, f64)> {
        if let Some(v) = self.char_fn(u) {
            return Ok((v, 0.0));
        }
        let samples = self.mc_samples()?;
        let n = samples.len() as f64;
        let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
        for j in &samples {
            let (s, c) = dot(u, j).sin_cos();
            sc += c;
            ss += s;
            sc2 += c * c;
            ss2 += s * s;
        }
        let (mc, ms) = (sc / n, ss / n);
        let var = (sc2 / n - mc * mc) + (ss2 / n - ms * ms);
        Ok((Complex64::new(mc, ms), (var.max(0.0) / n).sqrt()))
    }

    fn mc_samples(&self) -> Result<Vec<Vec<f64>>> {
        let mut rng = rng_from_seed(MC_SEED);
        (0..MC_SAMPLES).map(|_| self.sample(&mut rng).ok_or(Error::MissingJumpLaw)).collect()
    }

    /// `E[J 1{|J| <= cut}]` and `E[J J^T 1{|J| <= cut}]`.
    pub fn truncated_moments(&self, cut: f64) -> Result<(Vec<f64>, Mat)> {
        let d = self.dim();
        let from_atoms = |atoms: &[Vec<f64>], w: &[f64]| {
            let mut m1 = vec![0.0; d];
            let mut m2 = DMatrix::zeros(d, d);
            for (a, wk) in atoms.iter().zip(w) {
                if norm(a) <= cut {
                    for i in 0..d {
                        m1[i] += wk * a[i];
                        for j in 0..d {
                            m2[(i, j)] += wk * a[i] * a[j];
                        }
                    }
                }
            }
            (m1, m2)
        };
        Ok(match self {
            JumpLaw::PointMass { at } => from_atoms(std::slice::from_ref(at), &[1.0]),
            JumpLaw::Atoms { atoms, weights } => from_atoms(atoms, &Self::normalized_weights(weights)),
            JumpLaw::UniformBall { dim, radius } => {
                let m = cut.min(*radius);
                let p = (m / radius).powi(*dim as i32);
                (vec![0.0; d], DMatrix::identity(d, d) * (p * m * m / (*dim as f64 + 2.0)))
            }
            JumpLaw::Gaussian { .. } | JumpLaw::Custom(_) => {
                let samples = self.mc_samples()?;
                let w = vec![1.0 / samples.len() as f64; samples.len()];
                from_atoms(&samples, &w)
            }
        })
    }
}
