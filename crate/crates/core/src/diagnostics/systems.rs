//! Coupled samplers producing `(X_gamma, X)` from one driving sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::uniform_grid;
use crate::levy::LevyModel;
use crate::ou::{ax_gamma, intro_matrix, limit_path, matrix_ax_gamma, DiagonalOuSpec, MatrixOuSpec};
use crate::path::CadlagPath;
use crate::rng::member_seed;

/// A family `X_gamma` and its candidate limit `X` on a common probability space.
pub trait CoupledSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn horizon(&self) -> (f64, f64);
    /// `(X_gamma for each gamma, X)` for the member with this seed.
    fn pairs(&self, gammas: &[f64], seed: u64) -> Result<(Vec<CadlagPath>, CadlagPath)>;
}

/// Declarative description of a coupled system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `X_gamma = X = L`.
    Identical { model: LevyModel, steps: usize, horizon: f64 },
    /// `X_gamma = A X_gamma` of a diagonal OU process, `X = -G L`.
    DiagonalOu {
        lambdas: Vec<f64>,
        #[serde(default)]
        g: Option<Vec<Vec<f64>>>,
        model: LevyModel,
        steps: usize,
        horizon: f64,
    },
    /// `X_gamma = int (Id - exp(-gamma A (t-s))) dL(s)`, `X = L`. Either `a` or
    /// `matrix_id` (1..4) selects the generator.
    MatrixOu {
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        matrix_id: Option<usize>,
        model: LevyModel,
        steps: usize,
        horizon: f64,
    },
    /// Deterministic: `X` a unit step at `tau`, `X_gamma` a ramp of width `1/gamma` from `tau`.
    RampStep { tau: f64, horizon: f64 },
    /// `X_gamma` and `X` taken from independent members of `inner`.
    Uncoupled { inner: Box<SystemSpec> },
}

impl SystemSpec {
    pub fn build(&self) -> Result<Box<dyn CoupledSystem>> {
        Ok(match self {
            SystemSpec::Identical { model, steps, horizon } => {
                model.validate()?;
                Box::new(Identical { model: model.clone(), grid: uniform_grid(0.0, *horizon, *steps)? })
            }
            SystemSpec::DiagonalOu { lambdas, g, model, steps, horizon } => {
                let mut spec = DiagonalOuSpec::identity_noise(lambdas.clone(), 1.0, *horizon);
                if let Some(g) = g {
                    spec.g = g.clone();
                }
                spec.validate()?;
                model.validate()?;
                if model.dim != spec.noise_dim() {
                    return Err(Error::DimensionMismatch { expected: spec.noise_dim(), got: model.dim });
                }
                Box::new(DiagonalOu { spec, model: model.clone(), grid: uniform_grid(0.0, *horizon, *steps)? })
            }
            SystemSpec::MatrixOu { a, matrix_id, model, steps, horizon } => {
                let a = match (a, matrix_id) {
                    (Some(a), None) => a.clone(),
                    (None, Some(id)) => intro_matrix(*id)?,
                    _ => return Err(Error::InvalidArgument("matrix_ou needs exactly one of `a` and `matrix_id`".into())),
                };
                let spec = MatrixOuSpec::new(a, 1.0, *horizon);
                spec.validate()?;
                model.validate()?;
                if model.dim != spec.dim() {
                    return Err(Error::DimensionMismatch { expected: spec.dim(), got: model.dim });
                }
                Box::new(MatrixOu { spec, model: model.clone(), grid: uniform_grid(0.0, *horizon, *steps)? })
            }
            SystemSpec::RampStep { tau, horizon } => {
                if !(*tau > 0.0 && tau < horizon) {
                    return Err(Error::InvalidArgument("ramp_step needs 0 < tau < horizon".into()));
                }
                Box::new(RampStep { tau: *tau, horizon: *horizon })
            }
            SystemSpec::Uncoupled { inner } => Box::new(Uncoupled { inner: inner.build()? }),
        })
    }
}

struct Identical {
    model: LevyModel,
    grid: Vec<f64>,
}

impl CoupledSystem for Identical {
    fn dim(&self) -> usize {
        self.model.dim
    }
    fn horizon(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
    fn pairs(&self, gammas: &[f64], seed: u64) -> Result<(Vec<CadlagPath>, CadlagPath)> {
        let l = self.model.sample_path(&self.grid, seed)?.path();
        Ok((vec![l.clone(); gammas.len()], l))
    }
}

struct DiagonalOu {
    spec: DiagonalOuSpec,
    model: LevyModel,
    grid: Vec<f64>,
}

impl CoupledSystem for DiagonalOu {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn horizon(&self) -> (f64, f64) {
        (0.0, self.spec.horizon)
    }
    fn pairs(&self, gammas: &[f64], seed: u64) -> Result<(Vec<CadlagPath>, CadlagPath)> {
        let s = self.model.sample_path(&self.grid, seed)?;
        let xs = gammas.iter().map(|g| ax_gamma(&self.spec.with_gamma(*g), &s)).collect::<Result<_>>()?;
        Ok((xs, limit_path(&self.spec, &s)?))
    }
}

struct MatrixOu {
    spec: MatrixOuSpec,
    model: LevyModel,
    grid: Vec<f64>,
}

impl CoupledSystem for MatrixOu {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn horizon(&self) -> (f64, f64) {
        (0.0, self.spec.horizon)
    }
    fn pairs(&self, gammas: &[f64], seed: u64) -> Result<(Vec<CadlagPath>, CadlagPath)> {
        let s = self.model.sample_path(&self.grid, seed)?;
        let xs = gammas
            .iter()
            .map(|g| matrix_ax_gamma(&MatrixOuSpec { gamma: *g, ..self.spec.clone() }, &s))
            .collect::<Result<_>>()?;
        Ok((xs, s.path()))
    }
}

struct RampStep {
    tau: f64,
    horizon: f64,
}

impl CoupledSystem for RampStep {
    fn dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> (f64, f64) {
        (0.0, self.horizon)
    }
    fn pairs(&self, gammas: &[f64], _seed: u64) -> Result<(Vec<CadlagPath>, CadlagPath)> {
        let step = CadlagPath::step(0.0, self.horizon, self.tau, 0.0, 1.0)?;
        let ramps = gammas
            .iter()
            .map(|g| {
                let end = self.tau + 1.0 / g;
                if end < self.horizon {
                    CadlagPath::polyline(vec![0.0, self.tau, end, self.horizon], &[vec![0.0], vec![0.0], vec![1.0], vec![1.0]])
                } else {
                    let h = (self.horizon - self.tau) * g;
                    CadlagPath::polyline(vec![0.0, self.tau, self.horizon], &[vec![0.0], vec![0.0], vec![h]])
                }
            })
            .collect::<Result<_>>()?;
        Ok((ramps, step))
    }
}

struct Uncoupled {
    inner: Box<dyn CoupledSystem>,
}

impl CoupledSystem for Uncoupled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn horizon(&self) -> (f64, f64) {
        self.inner.horizon()
    }
    fn pairs(&self, gammas: &[f64], seed: u64) -> Result<(Vec<CadlagPath>, CadlagPath)> {
        let (xs, _) = self.inner.pairs(gammas, seed)?;
        let (_, x) = self.inner.pairs(gammas, member_seed(seed, 0x9e37_79b9_7f4a_7c15))?;
        Ok((xs, x))
    }
}
