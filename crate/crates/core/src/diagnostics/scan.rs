use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    binomial_estimate, trend_verdict, ConvergenceReport, CoupledSystem, ReportRow, RowKind, ScanConfig, Verdict,
    Verdicts, DECISION_RULE,
};
use crate::error::{Error, Result};
use crate::m1::{coordinate_distances, dm_scalar_projection, dm_strong_value, product_from_coordinates};
use crate::path::oscillation_profile;
use crate::rng::member_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Fdd,
    Oscillation,
    Strong,
    Product,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmMode {
    Strong,
    Product,
    Weak,
}

impl From<DmMode> for ScanMode {
    fn from(m: DmMode) -> Self {
        match m {
            DmMode::Strong => ScanMode::Strong,
            DmMode::Product => ScanMode::Product,
            DmMode::Weak => ScanMode::Weak,
        }
    }
}

/// Raw per-member statistics; thresholds are applied afterwards.
#[derive(Default)]
struct Member {
    fdd: Vec<f64>,
    osc: Vec<f64>,
    strong: Vec<f64>,
    product: Vec<f64>,
    coord: Vec<f64>,
    weak: Vec<f64>,
}

struct Plan<'a> {
    cfg: &'a ScanConfig,
    modes: &'a [ScanMode],
    functionals: Vec<Vec<f64>>,
    coords: Vec<usize>,
}

impl Plan<'_> {
    fn has(&self, m: ScanMode) -> bool {
        self.modes.contains(&m)
    }

    fn member(&self, system: &dyn CoupledSystem, seed: u64) -> Result<Member> {
        let cfg = self.cfg;
        let (xs, x) = system.pairs(&cfg.gammas, seed)?;
        let mut out = Member::default();
        let x_at: Vec<Vec<f64>> = if self.has(ScanMode::Fdd) {
            cfg.checkpoints.iter().map(|t| x.evaluate(*t)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        for xg in &xs {
            if self.has(ScanMode::Fdd) {
                for (t, xt) in cfg.checkpoints.iter().zip(&x_at) {
                    let xgt = xg.evaluate(*t)?;
                    for v in &self.functionals {
                        out.fdd.push(v.iter().zip(xgt.iter().zip(xt)).map(|(v, (a, b))| v * (a - b)).sum::<f64>().abs());
                    }
                }
            }
            if self.has(ScanMode::Oscillation) {
                for v in &self.functionals {
                    out.osc.extend(oscillation_profile(&xg.project(v)?, &cfg.deltas, cfg.mesh)?);
                }
            }
            if self.has(ScanMode::Strong) {
                out.strong.push(dm_strong_value(xg, &x, cfg.mesh)?);
            }
            if self.has(ScanMode::Product) {
                let rho = coordinate_distances(xg, &x, cfg.mesh)?;
                out.product.push(product_from_coordinates(&rho));
                out.coord.extend(self.coords.iter().map(|k| rho[*k]));
            }
            if self.has(ScanMode::Weak) {
                for v in &self.functionals {
                    out.weak.push(dm_scalar_projection(xg, &x, v, cfg.mesh)?);
                }
            }
        }
        Ok(out)
    }
}

fn label(v: &[f64]) -> Option<String> {
    let nz: Vec<usize> = (0..v.len()).filter(|i| v[*i] != 0.0).collect();
    (nz.len() == 1 && v[nz[0]] == 1.0).then(|| format!("e{}", nz[0]))
}

/// Runs the requested scans on one coupled ensemble.
pub fn run_scan(
    scenario: &str,
    cfg: &ScanConfig,
    system: &dyn CoupledSystem,
    modes: &[ScanMode],
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let (t0, t1) = system.horizon();
    if let Some(t) = cfg.checkpoints.iter().find(|t| !(**t >= t0 && **t <= t1)) {
        return Err(Error::Domain { t: *t, t0, t1 });
    }
    if modes.contains(&ScanMode::Fdd) && cfg.checkpoints.is_empty() {
        return Err(Error::InvalidArgument("fdd scan needs checkpoints".into()));
    }
    let d = system.dim();
    let plan = Plan {
        cfg,
        modes,
        functionals: cfg.resolved_functionals(d)?,
        coords: cfg.resolved_coordinates(d)?,
    };
    let members: Vec<Member> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = member_seed(cfg.base_seed, i);
            plan.member(system, seed).map_err(|e| e.at_seed(seed))
        })
        .collect::<Result<_>>()?;

    let n = cfg.n_paths;
    let hits = |idx: usize, eps: f64, pick: fn(&Member) -> &Vec<f64>| -> (f64, f64) {
        binomial_estimate(members.iter().filter(|m| pick(m)[idx] >= eps).count(), n)
    };
    let names: Vec<String> = plan
        .functionals
        .iter()
        .enumerate()
        .map(|(i, v)| label(v).unwrap_or_else(|| format!("v{i}")))
        .collect();
    let (ng, nv, nt, nd, nk) = (cfg.gammas.len(), names.len(), cfg.checkpoints.len(), cfg.deltas.len(), plan.coords.len());
    let mut rows = Vec::new();
    let mut verdicts = Verdicts::default();
    let row = |kind, gi: usize, delta, eps, t, f: &str, (estimate, stderr)| ReportRow {
        kind,
        gamma: cfg.gammas[gi],
        delta,
        epsilon: eps,
        t,
        functional: f.to_string(),
        estimate,
        stderr,
    };

    if plan.has(ScanMode::Fdd) {
        let mut vs = Vec::new();
        for &eps in &cfg.epsilons {
            for (ti, t) in cfg.checkpoints.iter().enumerate() {
                for vi in 0..nv {
                    let seq: Vec<(f64, f64)> =
                        (0..ng).map(|gi| hits((gi * nt + ti) * nv + vi, eps, |m| &m.fdd)).collect();
                    for (gi, e) in seq.iter().enumerate() {
                        rows.push(row(RowKind::Fdd, gi, None, eps, Some(*t), &names[vi], *e));
                    }
                    vs.push(trend_verdict(&seq, cfg.tol));
                }
            }
        }
        verdicts.fdd = Verdict::combine(vs);
    }
    if plan.has(ScanMode::Oscillation) {
        let mut vs = Vec::new();
        for &eps in &cfg.epsilons {
            for vi in 0..nv {
                for gi in 0..ng {
                    let seq: Vec<(f64, f64)> =
                        (0..nd).map(|di| hits((gi * nv + vi) * nd + di, eps, |m| &m.osc)).collect();
                    for (di, e) in seq.iter().enumerate() {
                        rows.push(row(RowKind::Oscillation, gi, Some(cfg.deltas[di]), eps, None, &names[vi], *e));
                    }
                    if gi == ng - 1 {
                        vs.push(trend_verdict(&seq, cfg.tol));
                    }
                }
            }
        }
        verdicts.oscillation = Verdict::combine(vs);
    }
    if plan.has(ScanMode::Strong) {
        let mut vs = Vec::new();
        for &eps in &cfg.epsilons {
            let seq: Vec<(f64, f64)> = (0..ng).map(|gi| hits(gi, eps, |m| &m.strong)).collect();
            for (gi, e) in seq.iter().enumerate() {
                rows.push(row(RowKind::DmStrong, gi, None, eps, None, "", *e));
            }
            vs.push(trend_verdict(&seq, cfg.tol));
        }
        verdicts.strong = Verdict::combine(vs);
    }
    if plan.has(ScanMode::Product) {
        let mut vs = Vec::new();
        for &eps in &cfg.epsilons {
            let seq: Vec<(f64, f64)> = (0..ng).map(|gi| hits(gi, eps, |m| &m.product)).collect();
            for (gi, e) in seq.iter().enumerate() {
                rows.push(row(RowKind::DmProduct, gi, None, eps, None, "", *e));
            }
            vs.push(trend_verdict(&seq, cfg.tol));
            for (ki, k) in plan.coords.iter().enumerate() {
                for gi in 0..ng {
                    let e = hits(gi * nk + ki, eps, |m| &m.coord);
                    rows.push(row(RowKind::DmCoordinate, gi, None, eps, None, &format!("e{k}"), e));
                }
            }
        }
        verdicts.product = Verdict::combine(vs);
    }
    if plan.has(ScanMode::Weak) {
        let mut vs = Vec::new();
        for &eps in &cfg.epsilons {
            for vi in 0..nv {
                let seq: Vec<(f64, f64)> = (0..ng).map(|gi| hits(gi * nv + vi, eps, |m| &m.weak)).collect();
                for (gi, e) in seq.iter().enumerate() {
                    rows.push(row(RowKind::DmWeak, gi, None, eps, None, &names[vi], *e));
                }
                vs.push(trend_verdict(&seq, cfg.tol));
            }
        }
        verdicts.weak = Verdict::combine(vs);
    }

    let cross_check = verdicts.cross_check();
    Ok(ConvergenceReport {
        scenario: scenario.to_string(),
        n_paths: n,
        base_seed: cfg.base_seed,
        functionals: plan.functionals,
        rows,
        verdicts,
        cross_check,
        decision_rule: DECISION_RULE.to_string(),
        tol: cfg.tol,
    })
}

/// Rows `P(|<X_gamma(t) - X(t), v>| >= eps)`.
pub fn fdd_scan(cfg: &ScanConfig, system: &dyn CoupledSystem) -> Result<Vec<ReportRow>> {
    Ok(run_scan("", cfg, system, &[ScanMode::Fdd])?.rows)
}

/// Rows `P(M(<X_gamma, v>; delta) >= eps)`.
pub fn oscillation_scan(cfg: &ScanConfig, system: &dyn CoupledSystem) -> Result<Vec<ReportRow>> {
    Ok(run_scan("", cfg, system, &[ScanMode::Oscillation])?.rows)
}

/// Rows `P(d_M(X_gamma, X) >= eps)` for the chosen mode.
pub fn dm_scan(cfg: &ScanConfig, system: &dyn CoupledSystem, mode: DmMode) -> Result<Vec<ReportRow>> {
    Ok(run_scan("", cfg, system, &[mode.into()])?.rows)
}
