use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::convolution::Kernel;
use crate::diagnostics::{ScanConfig, ScanMode, SystemSpec, ValidationConfig, Verdict};
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::linalg::mat_from_rows;
use crate::ou::{intro_matrix, intro_matrix_kernel, ou_kernel, DiagonalOuSpec, Figure1Config, MatrixOuSpec};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SKOROKHOD_OUT";
pub const DEFAULT_OUT: &str = "skorokhod-out";
pub const DEFAULT_STEPS: usize = 4096;

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn one() -> f64 {
    1.0
}

fn true_() -> bool {
    true
}

fn default_modes() -> Vec<ScanMode> {
    vec![ScanMode::Fdd, ScanMode::Oscillation, ScanMode::Strong]
}

/// Convolution kernels buildable from a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Identity { dim: usize },
    Zero { rows: usize, cols: usize },
    Constant { matrix: Vec<Vec<f64>> },
    /// Scalar `s -> scale exp(-rate s)`.
    Exponential {
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `phi_gamma^k` of a diagonal OU process, or its limit `-1` when `limit` is set.
    DiagonalOu {
        lambdas: Vec<f64>,
        gamma: f64,
        #[serde(default)]
        g: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        limit: bool,
    },
    /// `s -> Id - exp(-gamma A s)`.
    MatrixOu {
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        matrix_id: Option<usize>,
        gamma: f64,
    },
}

impl KernelSpec {
    pub fn build(&self, horizon: f64) -> Result<Kernel> {
        match self {
            KernelSpec::Identity { dim } => Kernel::identity(*dim, horizon),
            KernelSpec::Zero { rows, cols } => Kernel::zero(*rows, *cols, horizon),
            KernelSpec::Constant { matrix } => {
                if matrix.is_empty() || matrix.iter().any(|r| r.len() != matrix[0].len()) {
                    return Err(Error::InvalidArgument("constant kernel needs a rectangular matrix".into()));
                }
                Kernel::constant(mat_from_rows(matrix), horizon)
            }
            KernelSpec::Exponential { rate, scale } => {
                let (rate, scale) = (*rate, *scale);
                Kernel::general(1, 1, (0.0, horizon), move |s| DMatrix::from_element(1, 1, scale * (-rate * s).exp()))
            }
            KernelSpec::DiagonalOu { lambdas, gamma, g, limit } => {
                let mut spec = DiagonalOuSpec::identity_noise(lambdas.clone(), *gamma, horizon);
                if let Some(g) = g {
                    spec.g = g.clone();
                }
                let k = ou_kernel(&spec)?;
                Ok(if *limit { k.limit } else { k.gamma })
            }
            KernelSpec::MatrixOu { a, matrix_id, gamma } => {
                let a = match (a, matrix_id) {
                    (Some(a), None) => a.clone(),
                    (None, Some(id)) => intro_matrix(*id)?,
                    _ => return Err(Error::InvalidArgument("matrix_ou needs exactly one of `a` and `matrix_id`".into())),
                };
                intro_matrix_kernel(&MatrixOuSpec::new(a, *gamma, horizon))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Assertions {
    pub fdd: Option<Verdict>,
    pub oscillation: Option<Verdict>,
    pub strong: Option<Verdict>,
    pub product: Option<Verdict>,
    pub weak: Option<Verdict>,
    /// Strong convergence must imply marginal and oscillation convergence.
    pub cross_check: bool,
    /// Every largest-gamma oscillation estimate must exceed this value.
    pub oscillation_floor: Option<f64>,
    /// Report CSV that the run must reproduce byte for byte.
    pub baseline: Option<PathBuf>,
}

impl Default for Assertions {
    fn default() -> Self {
        Assertions {
            fdd: None,
            oscillation: None,
            strong: None,
            product: None,
            weak: None,
            cross_check: true,
            oscillation_floor: None,
            baseline: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharfnCase {
    pub kernel: KernelSpec,
    pub model: LevyModel,
    pub functionals: Vec<Vec<f64>>,
    pub betas: Vec<f64>,
    /// Draws paths from this model instead of `model` (negative controls).
    #[serde(default)]
    pub sampling_model: Option<LevyModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditCase {
    pub kernel: KernelSpec,
    pub model: LevyModel,
    pub alpha_cut: f64,
    /// Projects a matrix kernel to a scalar target.
    #[serde(default)]
    pub functional: Option<Vec<f64>>,
    #[serde(default)]
    pub n_paths: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSpec {
    pub settings: ValidationConfig,
    pub charfn: Vec<CharfnCase>,
    pub audits: Vec<AuditCase>,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec { settings: ValidationConfig::default(), charfn: Vec::new(), audits: Vec::new() }
    }
}

/// One experiment; every subcommand reads the parts it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default)]
    pub model: Option<LevyModel>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    /// Grid cells on `[0, horizon]`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default = "default_modes")]
    pub modes: Vec<ScanMode>,
    #[serde(default)]
    pub assertions: Assertions,
    #[serde(default)]
    pub validate: Option<ValidateSpec>,
    #[serde(default)]
    pub figure1: Option<Figure1Config>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "true_")]
    pub emit_svg: bool,
}

impl ExperimentConfig {
    pub fn new(scenario: &str) -> Self {
        serde_json::from_value(serde_json::json!({ "scenario": scenario })).expect("minimal config parses")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `cli > config > $SKOROKHOD_OUT > skorokhod-out`.
    pub fn resolve_output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

/// Applies `key.path=value`; the value is read as JSON, or as a string if that fails.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override '{assignment}' is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("bad override key '{key}'")));
    }
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        cur = match cur {
            Value::Object(m) => {
                if last {
                    m.insert(part.to_string(), value);
                    return Ok(());
                }
                m.entry(part.to_string()).or_insert(Value::Null)
            }
            Value::Array(a) => {
                let idx: usize = part.parse().map_err(|_| Error::Parse(format!("'{part}' in '{key}' is not an index")))?;
                let len = a.len();
                let slot = a.get_mut(idx).ok_or_else(|| Error::Parse(format!("index {idx} out of range ({len}) in '{key}'")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::Parse(format!("'{key}' descends into a scalar"))),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// Where a configuration came from; relative paths inside it resolve against `base`.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

/// Reads `preset:NAME` or a JSON file, then applies overrides.
pub fn load_config(source: &str, overrides: &[String]) -> Result<LoadedConfig> {
    let (mut value, base) = if let Some(name) = source.strip_prefix("preset:") {
        (serde_json::to_value(super::presets::preset(name)?)?, PathBuf::from("."))
    } else {
        let p = Path::new(source);
        let text = std::fs::read_to_string(p)?;
        let base = p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        (serde_json::from_str(&text)?, base)
    };
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    Ok(LoadedConfig { config: serde_json::from_value(value)?, base })
}
