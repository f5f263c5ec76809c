//! Strong M1 distance between càdlàg paths.
//!
//! Both completed graphs are subdivided so that every edge is at most `mesh`
//! long in the norm `max(|dt|, |dx|)`, then a min-max monotone matching of the
//! vertices is found by dynamic programming (discrete Fréchet distance). Any
//! monotone staircase through the two vertex lists is a discrete pair of
//! parametric representations, so the result is an upper bound on `d_M` that
//! tightens as the mesh shrinks.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path::{check_compatible, completed_graph, fmt_f64, norm_diff, CadlagPath, CompletedGraph};

/// Maximum number of DP cells a single matching may use.
pub const MAX_DP_CELLS: u64 = 10_000_000;

/// Default mesh: 1/2048 of the horizon.
pub fn default_mesh(path: &CadlagPath) -> f64 {
    (path.t1() - path.t0()) / 2048.0
}

/// [`dm_strong`] at the default mesh, coarsened once if that exceeds the cell budget.
pub fn dm_strong_default(a: &CadlagPath, b: &CadlagPath) -> Result<M1Result> {
    match dm_strong(a, b, default_mesh(a)) {
        Err(Error::Resource { suggested_mesh, .. }) => dm_strong(a, b, suggested_mesh),
        r => r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub i: usize,
    pub j: usize,
    pub r_a: f64,
    pub r_b: f64,
    pub cost: f64,
}

/// Monotone staircase through the densified vertex lists of two graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedParametrization {
    pub pairs: Vec<MatchedPair>,
    pub cost: f64,
}

impl MatchedParametrization {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,r_a,r_b,cost")?;
        for p in &self.pairs {
            writeln!(w, "{},{},{},{},{}", p.i, p.j, fmt_f64(p.r_a), fmt_f64(p.r_b), fmt_f64(p.cost))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct M1Result {
    pub distance: f64,
    pub mesh: f64,
    pub matching: MatchedParametrization,
}

#[inline]
fn cell_cost(a: &CompletedGraph, i: usize, b: &CompletedGraph, j: usize) -> f64 {
    (a.time(i) - b.time(j)).abs().max(norm_diff(a.point(i), b.point(j)))
}

fn prepare(f: &CadlagPath, g: &CadlagPath, mesh: f64) -> Result<(CompletedGraph, CompletedGraph)> {
    check_compatible(f, g)?;
    if !(mesh > 0.0) || !mesh.is_finite() {
        return Err(Error::InvalidArgument(format!("mesh must be positive, got {mesh}")));
    }
    let ga = completed_graph(f).simplified();
    let gb = completed_graph(g).simplified();
    let (na, nb) = (ga.densified_len(mesh), gb.densified_len(mesh));
    let cells = na.saturating_mul(nb);
    if cells > MAX_DP_CELLS {
        // cell count scales roughly like mesh^-2 once densification dominates
        let suggested_mesh = mesh * (cells as f64 / MAX_DP_CELLS as f64).sqrt() * 1.05;
        return Err(Error::Resource { cells, limit: MAX_DP_CELLS, suggested_mesh });
    }
    Ok((ga.densified(mesh), gb.densified(mesh)))
}

const FROM_START: u8 = 0;
const FROM_DIAG: u8 = 1;
const FROM_A: u8 = 2; // predecessor (i-1, j)
const FROM_B: u8 = 3; // predecessor (i, j-1)

/// Runs the DP; fills `back` (row-major n x m) when given.
fn frechet(a: &CompletedGraph, b: &CompletedGraph, mut back: Option<&mut Vec<u8>>) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    if let Some(bk) = back.as_deref_mut() {
        bk.clear();
        bk.resize(n * m, FROM_START);
    }
    for i in 0..n {
        for j in 0..m {
            let c = cell_cost(a, i, b, j);
            let (best, from) = if i == 0 && j == 0 {
                (f64::NEG_INFINITY, FROM_START)
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
                // ties: diagonal first, then advance A
                if diag <= up && diag <= left {
                    (diag, FROM_DIAG)
                } else if up <= left {
                    (up, FROM_A)
                } else {
                    (left, FROM_B)
                }
            };
            cur[j] = c.max(best);
            if let Some(bk) = back.as_deref_mut() {
                bk[i * m + j] = from;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Strong M1 distance with its matching certificate.
pub fn dm_strong(f: &CadlagPath, g: &CadlagPath, mesh: f64) -> Result<M1Result> {
    let (a, b) = prepare(f, g, mesh)?;
    let mut back = Vec::new();
    let distance = frechet(&a, &b, Some(&mut back));
    let m = b.len();
    let (mut i, mut j) = (a.len() - 1, m - 1);
    let mut pairs = Vec::new();
    loop {
        pairs.push(MatchedPair { i, j, r_a: a.time(i), r_b: b.time(j), cost: cell_cost(&a, i, &b, j) });
        match back[i * m + j] {
            FROM_DIAG => {
                i -= 1;
                j -= 1;
            }
            FROM_A => i -= 1,
            FROM_B => j -= 1,
            _ => break,
        }
    }
    pairs.reverse();
    Ok(M1Result { distance, mesh, matching: MatchedParametrization { pairs, cost: distance } })
}

/// Distance only; skips the backtracking table.
pub fn dm_strong_value(f: &CadlagPath, g: &CadlagPath, mesh: f64) -> Result<f64> {
    let (a, b) = prepare(f, g, mesh)?;
    Ok(frechet(&a, &b, None))
}

/// `d_M` of the scalar projections `<f, v>` and `<g, v>`.
pub fn dm_scalar_projection(f: &CadlagPath, g: &CadlagPath, v: &[f64], mesh: f64) -> Result<f64> {
    if v.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidArgument("zero functional".into()));
    }
    dm_strong_value(&f.project(v)?, &g.project(v)?, mesh)
}

/// Per-coordinate scalar distances `rho_k`.
pub fn coordinate_distances(f: &CadlagPath, g: &CadlagPath, mesh: f64) -> Result<Vec<f64>> {
    check_compatible(f, g)?;
    (0..f.dim())
        .into_par_iter()
        .map(|k| dm_strong_value(&f.coordinate(k)?, &g.coordinate(k)?, mesh))
        .collect()
}

/// Weighted sum `sum_k 2^-k rho_k / (1 + rho_k)`.
pub fn product_from_coordinates(rhos: &[f64]) -> f64 {
    rhos.iter()
        .enumerate()
        .map(|(k, r)| 0.5_f64.powi(k as i32 + 1) * r / (1.0 + r))
        .sum()
}

/// Product metric over the coordinate projections.
pub fn dm_product(f: &CadlagPath, g: &CadlagPath, mesh: f64) -> Result<f64> {
    Ok(product_from_coordinates(&coordinate_distances(f, g, mesh)?))
}
