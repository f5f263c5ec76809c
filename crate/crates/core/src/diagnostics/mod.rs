//! Monte Carlo estimates of convergence in probability along a gamma grid.

mod scan;
mod systems;
mod validate;

pub use scan::{dm_scan, fdd_scan, oscillation_scan, run_scan, DmMode, ScanMode};
pub use systems::{CoupledSystem, SystemSpec};
pub use validate::{
    charfn_validate, charfn_validate_against, maximal_inequality_audit, AuditRow, CharfnRow, ValidationConfig,
    MIN_CHARFN_PATHS,
};

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Smallest ensemble for which probability estimates are reported.
pub const MIN_PATHS: usize = 100;

/// Decision rule recorded in every report.
pub const DECISION_RULE: &str = "converging: every step p[i+1] <= p[i] + 2*sqrt(se[i]^2 + se[i+1]^2), \
the last estimate is below the first (or zero), and the last estimate is <= tol; \
not_converging: last estimate - 2*se > tol; otherwise inconclusive. \
Oscillation uses the largest-gamma row read along the decreasing delta grid. \
Tolerances are regression baselines, not rates.";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub gammas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub n_paths: usize,
    /// Test functionals. Empty means basis vectors plus 8 random unit vectors.
    pub functionals: Vec<Vec<f64>>,
    /// Basis indices for per-coordinate rows in product mode. Empty means all.
    pub coordinates: Vec<usize>,
    /// Times for the marginal scan.
    pub checkpoints: Vec<f64>,
    pub base_seed: u64,
    /// Densification mesh for DP distances and oscillations.
    pub mesh: f64,
    /// Final-estimate tolerance for the verdict rule.
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            gammas: vec![10.0, 100.0, 1000.0],
            epsilons: vec![0.1],
            deltas: vec![0.1, 0.05, 0.025, 0.0125],
            n_paths: 200,
            functionals: Vec::new(),
            coordinates: Vec::new(),
            checkpoints: vec![0.5, 1.0],
            base_seed: 0,
            mesh: 0.005,
            tol: 0.05,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.gammas.is_empty() || self.epsilons.is_empty() || self.deltas.is_empty() {
            return bad("gammas, epsilons and deltas must be nonempty");
        }
        if self.gammas.iter().any(|g| !(*g > 0.0) || !g.is_finite()) || self.gammas.windows(2).any(|w| w[1] <= w[0]) {
            return bad("gammas must be positive and strictly increasing");
        }
        if self.deltas.iter().any(|d| !(*d > 0.0)) || self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return bad("deltas must be positive and strictly decreasing");
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return bad("epsilons must be positive");
        }
        if !(self.mesh > 0.0) || !(self.tol >= 0.0) {
            return bad("mesh must be positive and tol non-negative");
        }
        if self.n_paths < MIN_PATHS {
            return Err(Error::EnsembleTooSmall { n: self.n_paths, min: MIN_PATHS });
        }
        Ok(())
    }

    pub(crate) fn resolved_functionals(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        if !self.functionals.is_empty() {
            if let Some(v) = self.functionals.iter().find(|v| v.len() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            return Ok(self.functionals.clone());
        }
        Ok(default_functionals(dim, self.base_seed))
    }

    pub(crate) fn resolved_coordinates(&self, dim: usize) -> Result<Vec<usize>> {
        if let Some(k) = self.coordinates.iter().find(|k| **k >= dim) {
            return Err(Error::InvalidArgument(format!("coordinate {k} out of range for dimension {dim}")));
        }
        Ok(if self.coordinates.is_empty() { (0..dim).collect() } else { self.coordinates.clone() })
    }
}

/// Basis vectors followed by 8 unit vectors drawn from `seed`.
pub fn default_functionals(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        })
        .collect();
    if dim > 1 {
        let mut rng = rng_from_seed(seed);
        while out.len() < dim + 8 {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                out.push(v.iter().map(|x| x / n).collect());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    NotConverging,
    Inconclusive,
}

impl Verdict {
    /// Conjunction over several sequences: any failure wins, then any doubt.
    pub fn combine(vs: impl IntoIterator<Item = Verdict>) -> Option<Verdict> {
        let mut out = None;
        for v in vs {
            out = Some(match (out, v) {
                (_, Verdict::NotConverging) | (Some(Verdict::NotConverging), _) => Verdict::NotConverging,
                (_, Verdict::Inconclusive) | (Some(Verdict::Inconclusive), _) => Verdict::Inconclusive,
                _ => Verdict::Converging,
            });
        }
        out
    }
}

/// Verdict on a sequence of `(estimate, stderr)` along a refining grid.
pub fn trend_verdict(seq: &[(f64, f64)], tol: f64) -> Verdict {
    let Some(&(last, last_se)) = seq.last() else {
        return Verdict::Inconclusive;
    };
    let steps_ok = seq.windows(2).all(|w| w[1].0 <= w[0].0 + 2.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt());
    if steps_ok && (last < seq[0].0 || last == 0.0) && last <= tol {
        Verdict::Converging
    } else if last - 2.0 * last_se > tol {
        Verdict::NotConverging
    } else {
        Verdict::Inconclusive
    }
}

/// `(p, sqrt(p (1 - p) / n))`.
pub fn binomial_estimate(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Fdd,
    Oscillation,
    DmStrong,
    DmProduct,
    DmCoordinate,
    DmWeak,
}

impl RowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Fdd => "fdd",
            RowKind::Oscillation => "oscillation",
            RowKind::DmStrong => "dm_strong",
            RowKind::DmProduct => "dm_product",
            RowKind::DmCoordinate => "dm_coordinate",
            RowKind::DmWeak => "dm_weak",
        }
    }
}

/// One probability estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: RowKind,
    pub gamma: f64,
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub t: Option<f64>,
    /// `e{k}` for basis vectors and coordinates, `v{i}` for other functionals, empty otherwise.
    pub functional: String,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub fdd: Option<Verdict>,
    pub oscillation: Option<Verdict>,
    pub strong: Option<Verdict>,
    pub product: Option<Verdict>,
    pub weak: Option<Verdict>,
}

/// Strong convergence must come with marginal and oscillation convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub holds: bool,
    pub detail: String,
}

impl Verdicts {
    pub fn cross_check(&self) -> CrossCheck {
        if self.strong != Some(Verdict::Converging) {
            return CrossCheck { holds: true, detail: "strong verdict is not converging; nothing to check".into() };
        }
        let mut missing = Vec::new();
        if self.fdd != Some(Verdict::Converging) {
            missing.push(format!("fdd = {:?}", self.fdd));
        }
        if self.oscillation != Some(Verdict::Converging) {
            missing.push(format!("oscillation = {:?}", self.oscillation));
        }
        if missing.is_empty() {
            CrossCheck { holds: true, detail: "strong, fdd and oscillation all converging".into() }
        } else {
            CrossCheck { holds: false, detail: format!("strong converging but {}", missing.join(", ")) }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub n_paths: usize,
    pub base_seed: u64,
    pub functionals: Vec<Vec<f64>>,
    pub rows: Vec<ReportRow>,
    pub verdicts: Verdicts,
    pub cross_check: CrossCheck,
    pub decision_rule: String,
    pub tol: f64,
}

pub const REPORT_CSV_HEADER: &str = "scenario,kind,gamma,delta,epsilon,t,functional,estimate,stderr";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ConvergenceReport {
    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{REPORT_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                self.scenario,
                r.kind.as_str(),
                r.gamma,
                opt(r.delta),
                r.epsilon,
                opt(r.t),
                r.functional,
                r.estimate,
                r.stderr
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("report CSV is ASCII")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rule() {
        assert_eq!(trend_verdict(&[(0.0, 0.0), (0.0, 0.0)], 0.05), Verdict::Converging);
        assert_eq!(trend_verdict(&[(0.8, 0.03), (0.3, 0.03), (0.02, 0.01)], 0.05), Verdict::Converging);
        assert_eq!(trend_verdict(&[(0.8, 0.03), (0.9, 0.03), (0.02, 0.01)], 0.05), Verdict::Inconclusive);
        assert_eq!(trend_verdict(&[(0.6, 0.03), (0.6, 0.03)], 0.05), Verdict::NotConverging);
        assert_eq!(trend_verdict(&[(0.3, 0.03), (0.1, 0.03)], 0.05), Verdict::Inconclusive);
        assert_eq!(
            Verdict::combine([Verdict::Converging, Verdict::Inconclusive, Verdict::Converging]),
            Some(Verdict::Inconclusive)
        );
        assert_eq!(Verdict::combine([Verdict::Inconclusive, Verdict::NotConverging]), Some(Verdict::NotConverging));
        assert_eq!(Verdict::combine([]), None);
    }

    #[test]
    fn functionals_are_unit() {
        let f = default_functionals(3, 7);
        assert_eq!(f.len(), 11);
        for v in &f {
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(f, default_functionals(3, 7));
        assert_eq!(default_functionals(1, 7), vec![vec![1.0]]);
    }

    #[test]
    fn small_ensembles_refused() {
        let c = ScanConfig { n_paths: 99, ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::EnsembleTooSmall { n: 99, min: 100 })));
    }
}
