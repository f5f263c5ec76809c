//! Named experiments. `skorokhod <cmd> preset:NAME` runs one directly.

use super::config::{AuditCase, CharfnCase, ExperimentConfig, KernelSpec, ValidateSpec};
use crate::diagnostics::{ScanConfig, ScanMode, SystemSpec, ValidationConfig, Verdict};
use crate::error::{Error, Result};
use crate::levy::{JumpLaw, LevyModel};
use crate::ou::Figure1Config;

pub const PRESETS: &[&str] = &[
    "identical",
    "ramp_step",
    "diagonal_ou",
    "figure1_a1",
    "figure1_a2",
    "figure1_a3",
    "figure1_a4",
    "figure1",
    "validate_gaussian",
    "validate_zero",
];

/// Presets that run `scan`.
pub const SCAN_PRESETS: &[&str] =
    &["identical", "ramp_step", "diagonal_ou", "figure1_a1", "figure1_a2", "figure1_a3", "figure1_a4"];

fn eye(d: usize, s: f64) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { s } else { 0.0 }).collect()).collect()
}

fn basis(d: usize) -> Vec<Vec<f64>> {
    eye(d, 1.0)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::new(name);
    match name {
        "identical" => {
            let model = LevyModel::compound_poisson(2, 5.0, JumpLaw::Gaussian { mean: vec![0.0; 2], cov: eye(2, 1.0) });
            c.system = Some(SystemSpec::Identical { model, steps: 256, horizon: 1.0 });
            c.scan = ScanConfig {
                n_paths: 100,
                mesh: 0.01,
                deltas: vec![0.05, 0.02, 0.01, 0.005, 0.002],
                ..Default::default()
            };
            c.modes = vec![ScanMode::Fdd, ScanMode::Oscillation, ScanMode::Strong, ScanMode::Product, ScanMode::Weak];
            c.assertions.strong = Some(Verdict::Converging);
            c.assertions.fdd = Some(Verdict::Converging);
            c.assertions.product = Some(Verdict::Converging);
            c.assertions.weak = Some(Verdict::Converging);
            c.assertions.oscillation = Some(Verdict::Converging);
        }
        "ramp_step" => {
            c.system = Some(SystemSpec::RampStep { tau: 0.5, horizon: 1.0 });
            c.scan = ScanConfig {
                gammas: vec![2.0, 4.0, 8.0, 16.0, 32.0],
                epsilons: vec![0.1],
                deltas: vec![0.1, 0.05, 0.02],
                n_paths: 100,
                checkpoints: vec![0.75],
                mesh: 0.005,
                ..Default::default()
            };
            c.assertions.strong = Some(Verdict::Converging);
            c.assertions.fdd = Some(Verdict::Converging);
            c.assertions.oscillation = Some(Verdict::Converging);
        }
        "diagonal_ou" => {
            let model = LevyModel::compound_poisson(3, 3.0, JumpLaw::Gaussian { mean: vec![0.0; 3], cov: eye(3, 1.0) })
                .with_cov(eye(3, 0.09));
            c.system = Some(SystemSpec::DiagonalOu { lambdas: vec![1.0, 3.0, 9.0], g: None, model, steps: 512, horizon: 1.0 });
            c.scan = ScanConfig {
                epsilons: vec![0.1],
                deltas: vec![0.1, 0.05, 0.02, 0.01, 0.005],
                n_paths: 400,
                functionals: basis(3),
                mesh: 0.01,
                tol: 0.15,
                ..Default::default()
            };
            c.modes = vec![ScanMode::Fdd, ScanMode::Oscillation, ScanMode::Product];
            c.assertions.product = Some(Verdict::Converging);
            c.assertions.fdd = Some(Verdict::Converging);
        }
        "figure1_a1" | "figure1_a2" | "figure1_a3" | "figure1_a4" => {
            let id: usize = name[name.len() - 1..].parse().expect("preset names end in a digit");
            c.system = Some(SystemSpec::MatrixOu {
                a: None,
                matrix_id: Some(id),
                model: LevyModel::isotropic_stable(2, 1.5, 1.0),
                steps: 1024,
                horizon: 1.0,
            });
            c.scan = ScanConfig {
                epsilons: vec![0.25],
                deltas: vec![0.1, 0.05, 0.02, 0.01, 0.005],
                n_paths: 400,
                mesh: 0.05,
                tol: 0.1,
                ..Default::default()
            };
            match id {
                1 => c.assertions.strong = Some(Verdict::Converging),
                2 => {
                    // diagonal A: the product topology is the natural one
                    c.modes = vec![ScanMode::Fdd, ScanMode::Oscillation, ScanMode::Product];
                    c.scan.functionals = basis(2);
                    c.assertions.product = Some(Verdict::Converging);
                }
                4 => c.assertions.oscillation_floor = Some(0.2),
                _ => {}
            }
        }
        "figure1" => {
            c.figure1 = Some(Figure1Config::default());
        }
        "validate_gaussian" => {
            c.validate = Some(ValidateSpec {
                settings: ValidationConfig { n_paths: 100_000, seed: 0, horizon: 1.0, steps: 64 },
                charfn: vec![CharfnCase {
                    kernel: KernelSpec::Identity { dim: 1 },
                    model: LevyModel::brownian(1),
                    functionals: vec![vec![1.0]],
                    betas: vec![0.5, 1.0, 2.0],
                    sampling_model: None,
                }],
                audits: Vec::new(),
            });
        }
        "validate_zero" => {
            c.validate = Some(ValidateSpec {
                settings: ValidationConfig { n_paths: 10_000, seed: 0, horizon: 1.0, steps: 64 },
                charfn: vec![CharfnCase {
                    kernel: KernelSpec::Zero { rows: 1, cols: 2 },
                    model: LevyModel::isotropic_stable(2, 1.5, 1.0),
                    functionals: vec![vec![1.0]],
                    betas: vec![1.0, 4.0],
                    sampling_model: None,
                }],
                audits: vec![AuditCase {
                    kernel: KernelSpec::Zero { rows: 1, cols: 1 },
                    model: LevyModel::compound_poisson(1, 4.0, JumpLaw::PointMass { at: vec![0.5] }),
                    alpha_cut: 1.0,
                    functional: None,
                    n_paths: Some(200),
                }],
            });
        }
        _ => {
            return Err(Error::InvalidArgument(format!("unknown preset '{name}'; known: {}", PRESETS.join(", "))));
        }
    }
    Ok(c)
}
