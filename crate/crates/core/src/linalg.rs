//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

pub type Mat = DMatrix<f64>;

/// Eigenvalues below this (relative to the largest) are treated as zero.
pub const EIGEN_TOL: f64 = 1e-12;

pub fn mat_from_rows(rows: &[Vec<f64>]) -> Mat {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn is_symmetric(m: &Mat, tol: f64) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * (1.0 + m[(i, j)].abs())))
}

/// Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue, with the
/// number of negative eigenvalues that were clipped to zero.
pub fn sorted_eigen(m: &Mat) -> (Vec<(f64, Vec<f64>)>, usize) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut clipped = 0;
    for p in &mut pairs {
        if p.0 < 0.0 {
            clipped += 1;
            p.0 = 0.0;
        }
    }
    (pairs, clipped)
}

/// Square root `S` of a PSD matrix with `S S^T = m`: Cholesky when possible,
/// otherwise the eigen square root with clipped eigenvalues.
pub fn psd_sqrt(m: &Mat) -> Mat {
    if let Some(ch) = m.clone().cholesky() {
        return ch.l();
    }
    let n = m.nrows();
    let (pairs, _) = sorted_eigen(m);
    let mut s = DMatrix::zeros(n, n);
    for (k, (lam, v)) in pairs.iter().enumerate() {
        let r = lam.sqrt();
        for i in 0..n {
            s[(i, k)] = v[i] * r;
        }
    }
    s
}
