//! Time grids.

use crate::error::{Error, Result};

/// Relative tolerance for treating a grid as uniform.
pub const UNIFORM_TOL: f64 = 1e-9;

/// `steps + 1` points from `t0` to `t1` with exact endpoints.
pub fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("bad grid [{t0}, {t1}] with {steps} steps")));
    }
    let h = t1 - t0;
    let mut g: Vec<f64> = (0..=steps).map(|i| t0 + h * (i as f64 / steps as f64)).collect();
    g[steps] = t1;
    Ok(g)
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::GridMismatch("grid needs at least two points".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Common spacing of a uniform grid, or an error naming the first offending cell.
pub fn uniform_step(grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let n = grid.len() - 1;
    let h = (grid[n] - grid[0]) / n as f64;
    for (i, w) in grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > UNIFORM_TOL * h {
            return Err(Error::GridMismatch(format!("cell {i} has length {} but the grid step is {h}", w[1] - w[0])));
        }
    }
    Ok(h)
}
