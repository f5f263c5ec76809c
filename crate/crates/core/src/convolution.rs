//! Stochastic convolution integrals `(F * L)(t) = int_0^t F(t - s) dL(s)` on
//! grids, 2-variation, and the maximal-inequality bounds.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{uniform_grid, uniform_step};
use crate::levy::{small_jump_factorization, LevyModel, LevyPathSample, SmallJumpFactorization};
use crate::linalg::Mat;
use crate::path::CadlagPath;

pub type MatrixFn = Arc<dyn Fn(f64) -> Mat + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default number of kernel sampling steps.
pub const DEFAULT_KERNEL_STEPS: usize = 1024;

#[derive(Clone)]
pub enum KernelForm {
    /// `s -> F(s)`, a `rows x cols` matrix.
    General(MatrixFn),
    /// `F(s) = diag(phi(s)) g^T`: coordinate `k` of `F(s) u` is `phi_k(s) <g_k, u>`
    /// where `g_k` is column `k` of `g` (`cols x rows`).
    Diagonal { phis: Vec<ScalarFn>, g: Mat },
}

/// Operator-valued integrand from R^cols (noise) to R^rows (state),
/// with the sampling grid used by quadratures and 2-variation.
#[derive(Clone)]
pub struct Kernel {
    form: KernelForm,
    rows: usize,
    cols: usize,
    domain: (f64, f64),
    grid: Vec<f64>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match self.form {
            KernelForm::General(_) => "general",
            KernelForm::Diagonal { .. } => "diagonal",
        };
        f.debug_struct("Kernel")
            .field("form", &form)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("domain", &self.domain)
            .field("grid_len", &self.grid.len())
            .finish()
    }
}

impl Kernel {
    pub fn general<F>(rows: usize, cols: usize, domain: (f64, f64), f: F) -> Result<Self>
    where
        F: Fn(f64) -> Mat + Send + Sync + 'static,
    {
        Self::build(KernelForm::General(Arc::new(f)), rows, cols, domain)
    }

    pub fn diagonal(phis: Vec<ScalarFn>, g: Mat, domain: (f64, f64)) -> Result<Self> {
        if phis.len() != g.ncols() {
            return Err(Error::DimensionMismatch { expected: g.ncols(), got: phis.len() });
        }
        let (rows, cols) = (g.ncols(), g.nrows());
        Self::build(KernelForm::Diagonal { phis, g }, rows, cols, domain)
    }

    fn build(form: KernelForm, rows: usize, cols: usize, domain: (f64, f64)) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("kernel dimensions must be positive".into()));
        }
        let grid = uniform_grid(domain.0, domain.1, DEFAULT_KERNEL_STEPS)?;
        Ok(Kernel { form, rows, cols, domain, grid })
    }

    /// `F(s) = m` on `[0, t1]`.
    pub fn constant(m: Mat, t1: f64) -> Result<Self> {
        let (r, c) = m.shape();
        Self::general(r, c, (0.0, t1), move |_| m.clone())
    }

    pub fn identity(d: usize, t1: f64) -> Result<Self> {
        Self::constant(DMatrix::identity(d, d), t1)
    }

    pub fn zero(rows: usize, cols: usize, t1: f64) -> Result<Self> {
        Self::constant(DMatrix::zeros(rows, cols), t1)
    }

    /// Scalar kernel `s -> phi(s)` on R.
    pub fn scalar<F>(domain: (f64, f64), phi: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::general(1, 1, domain, move |s| DMatrix::from_element(1, 1, phi(s)))
    }

    /// Replaces the sampling grid; it must lie inside the domain.
    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        crate::grid::check_grid(&grid)?;
        if grid[0] < self.domain.0 || grid[grid.len() - 1] > self.domain.1 {
            return Err(Error::GridMismatch("kernel grid leaves the kernel domain".into()));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn with_steps(self, steps: usize) -> Result<Self> {
        let g = uniform_grid(self.domain.0, self.domain.1, steps)?;
        self.with_grid(g)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.form, KernelForm::Diagonal { .. })
    }

    /// `F(s)` as a `rows x cols` matrix.
    pub fn eval(&self, s: f64) -> Mat {
        match &self.form {
            KernelForm::General(f) => f(s),
            KernelForm::Diagonal { phis, g } => {
                let mut m = g.transpose();
                for (k, phi) in phis.iter().enumerate() {
                    let p = phi(s);
                    m.row_mut(k).scale_mut(p);
                }
                m
            }
        }
    }

    /// `F*(s) v = F(s)^T v`.
    pub fn adjoint_apply(&self, s: f64, v: &[f64]) -> Vec<f64> {
        let m = self.eval(s);
        (0..self.cols).map(|c| (0..self.rows).map(|r| m[(r, c)] * v[r]).sum()).collect()
    }

    /// Scalar-target kernel `s -> v^T F(s)`.
    pub fn functional(&self, v: &[f64]) -> Result<Kernel> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let form = self.form.clone();
        let (rows, cols) = (self.rows, self.cols);
        let v = v.to_vec();
        let inner = Kernel { form, rows, cols, domain: self.domain, grid: Vec::new() };
        let k = Kernel::general(1, cols, self.domain, move |s| {
            let m = inner.eval(s);
            DMatrix::from_fn(1, cols, |_, c| (0..rows).map(|r| v[r] * m[(r, c)]).sum())
        })?;
        k.with_grid(self.grid.clone())
    }

    /// `a F1 + b F2` as a general kernel on the common part of the domains.
    pub fn linear_combination(a: f64, k1: &Kernel, b: f64, k2: &Kernel) -> Result<Kernel> {
        if k1.rows != k2.rows || k1.cols != k2.cols {
            return Err(Error::DimensionMismatch { expected: k1.rows * k1.cols, got: k2.rows * k2.cols });
        }
        let domain = (k1.domain.0.max(k2.domain.0), k1.domain.1.min(k2.domain.1));
        let (c1, c2) = (k1.clone(), k2.clone());
        Kernel::general(k1.rows, k1.cols, domain, move |s| c1.eval(s) * a + c2.eval(s) * b)
    }

    /// Kernel grid points inside `[0, t1]`, with both endpoints present.
    fn grid_on(&self, t1: f64) -> Vec<f64> {
        let mut g: Vec<f64> = self.grid.iter().copied().filter(|s| *s >= 0.0 && *s <= t1).collect();
        if g.first() != Some(&0.0) {
            g.insert(0, 0.0);
        }
        if g.last() != Some(&t1) {
            g.push(t1);
        }
        g
    }

    fn check_covers(&self, horizon: f64) -> Result<()> {
        let slack = 1e-9 * horizon.abs().max(1.0);
        if self.domain.0 > 0.0 || self.domain.1 < horizon - slack {
            return Err(Error::GridMismatch(format!(
                "kernel domain [{}, {}] does not cover lags [0, {horizon}]",
                self.domain.0, self.domain.1
            )));
        }
        Ok(())
    }

    /// `F(k h)` for `k = 0..=n`, clamped to the domain end.
    fn lag_table(&self, h: f64, n: usize) -> Vec<Mat> {
        (0..=n).map(|k| self.eval((k as f64 * h).min(self.domain.1))).collect()
    }
}

fn check_sample(kernel: &Kernel, sample: &LevyPathSample) -> Result<f64> {
    if sample.dim != kernel.cols {
        return Err(Error::DimensionMismatch { expected: kernel.cols, got: sample.dim });
    }
    let h = uniform_step(&sample.grid)?;
    kernel.check_covers(sample.grid[sample.grid.len() - 1] - sample.grid[0])?;
    Ok(h)
}

/// Left-point Riemann convolution `(F * L)(t_i) = sum_{j<i} F(t_i - t_j) dL_j`.
///
/// The returned path jumps by `F(0) dL_i` at `t_{i+1}` and is linear between
/// grid points.
pub fn convolve(kernel: &Kernel, sample: &LevyPathSample) -> Result<CadlagPath> {
    let h = check_sample(kernel, sample)?;
    let n = sample.n_cells();
    let (rows, cols) = (kernel.rows, kernel.cols);
    let mut right = vec![0.0; (n + 1) * rows];
    let mut left = vec![0.0; (n + 1) * rows];

    match &kernel.form {
        KernelForm::Diagonal { phis, g } => {
            // z_j = g^T dL_j, then one scalar convolution per coordinate
            let mut z = vec![0.0; n * rows];
            for j in 0..n {
                let inc = sample.increment(j);
                for k in 0..rows {
                    z[j * rows + k] = (0..cols).map(|c| g[(c, k)] * inc[c]).sum();
                }
            }
            for (k, phi) in phis.iter().enumerate() {
                let table: Vec<f64> = (0..=n).map(|m| phi((m as f64 * h).min(kernel.domain.1))).collect();
                for i in 1..=n {
                    // the newest increment enters with F(h) on the right and F(h) - F(0) on the left
                    let mut s = 0.0;
                    for j in 0..i - 1 {
                        s += table[i - j] * z[j * rows + k];
                    }
                    let last = z[(i - 1) * rows + k];
                    right[i * rows + k] = s + table[1] * last;
                    left[i * rows + k] = s + (table[1] - table[0]) * last;
                }
            }
        }
        KernelForm::General(_) => {
            let table = kernel.lag_table(h, n);
            let mut acc = vec![0.0; rows];
            for i in 1..=n {
                acc.iter_mut().for_each(|a| *a = 0.0);
                for j in 0..i - 1 {
                    let m = &table[i - j];
                    let inc = sample.increment(j);
                    for r in 0..rows {
                        let mut s = 0.0;
                        for c in 0..cols {
                            s += m[(r, c)] * inc[c];
                        }
                        acc[r] += s;
                    }
                }
                let inc = sample.increment(i - 1);
                for r in 0..rows {
                    let (mut now, mut jump_free) = (0.0, 0.0);
                    for c in 0..cols {
                        now += table[1][(r, c)] * inc[c];
                        jump_free += (table[1][(r, c)] - table[0][(r, c)]) * inc[c];
                    }
                    right[i * rows + r] = acc[r] + now;
                    left[i * rows + r] = acc[r] + jump_free;
                }
            }
        }
    }
    CadlagPath::new(rows, sample.grid.clone(), left, right)
}

/// Terminal value `(F * L)(T)` only, in `O(n)` kernel evaluations.
pub fn convolve_terminal(kernel: &Kernel, sample: &LevyPathSample) -> Result<Vec<f64>> {
    let h = check_sample(kernel, sample)?;
    let n = sample.n_cells();
    let mut out = vec![0.0; kernel.rows];
    for j in 0..n {
        let m = kernel.eval(((n - j) as f64 * h).min(kernel.domain.1));
        let inc = sample.increment(j);
        for r in 0..kernel.rows {
            out[r] += (0..kernel.cols).map(|c| m[(r, c)] * inc[c]).sum::<f64>();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tv2Result {
    pub value: f64,
    /// Maximal sum of squared increments, `value^2` before rounding.
    pub squared: f64,
    /// Indices of the maximizing subsequence.
    pub witness: Vec<usize>,
}

/// 2-variation `sup sum |v_{k} - v_{k-1}|^2` over all subsequences, by the
/// `O(n^2)` recursion `dp[i] = max_{j<i} dp[j] + |v_i - v_j|^2`.
pub fn tv2_norm<V: AsRef<[f64]>>(samples: &[V]) -> Tv2Result {
    let n = samples.len();
    if n == 0 {
        return Tv2Result { value: 0.0, squared: 0.0, witness: Vec::new() };
    }
    let mut dp = vec![0.0_f64; n];
    let mut back = vec![usize::MAX; n];
    for i in 1..n {
        let vi = samples[i].as_ref();
        for j in 0..i {
            let vj = samples[j].as_ref();
            let d2: f64 = vi.iter().zip(vj).map(|(a, b)| (a - b) * (a - b)).sum();
            let cand = dp[j] + d2;
            if cand > dp[i] {
                dp[i] = cand;
                back[i] = j;
            }
        }
    }
    let mut end = 0;
    for i in 1..n {
        if dp[i] > dp[end] {
            end = i;
        }
    }
    let mut witness = vec![end];
    while back[end] != usize::MAX {
        end = back[end];
        witness.push(end);
    }
    witness.reverse();
    let squared = dp[witness[witness.len() - 1]];
    Tv2Result { value: squared.sqrt(), squared, witness }
}

pub fn tv2_scalar(samples: &[f64]) -> Tv2Result {
    let v: Vec<[f64; 1]> = samples.iter().map(|x| [*x]).collect();
    tv2_norm(&v)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `kappa = 32 sqrt(2) int_0^1 sqrt(ln(1/s)) ds`, by adaptive quadrature after
/// the substitution `s = exp(-x^2)`; computed once.
pub fn kappa() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| {
        let f = |x: f64| 2.0 * x * x * (-x * x).exp();
        32.0 * 2f64.sqrt() * adaptive_simpson(&f, 0.0, 12.0, 1e-13)
    })
}

/// `kappa sqrt(2T) sum_k sigma_k |<f(.), h_k>|_TV2` for a scalar-target kernel.
pub fn maximal_bound_general(kernel: &Kernel, fact: &SmallJumpFactorization, horizon: f64) -> Result<f64> {
    if kernel.rows != 1 {
        return Err(Error::InvalidArgument("the general bound needs a scalar-target kernel; use Kernel::functional".into()));
    }
    if fact.factors.is_empty() {
        return Ok(0.0);
    }
    if fact.r_alpha.nrows() != kernel.cols {
        return Err(Error::DimensionMismatch { expected: kernel.cols, got: fact.r_alpha.nrows() });
    }
    let grid = kernel.grid_on(horizon);
    let rows: Vec<Mat> = grid.iter().map(|s| kernel.eval(*s)).collect();
    let mut sum = 0.0;
    for (s2, h) in &fact.factors {
        let proj: Vec<f64> = rows.iter().map(|m| (0..kernel.cols).map(|c| m[(0, c)] * h[c]).sum()).collect();
        sum += s2.sqrt() * tv2_scalar(&proj).value;
    }
    Ok(kappa() * (2.0 * horizon).sqrt() * sum)
}

/// Terms of the diagonal bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalBound {
    pub bound: f64,
    /// `|phi_k|_TV2` on the kernel grid in `[0, T]`.
    pub tv2: Vec<f64>,
    /// `int_{|u| <= alpha} <u, G e_k>^2 nu(du)`.
    pub second_moments: Vec<f64>,
}

pub fn maximal_bound_diagonal_terms(
    kernel: &Kernel,
    model: &LevyModel,
    alpha_cut: f64,
    v: &[f64],
    horizon: f64,
) -> Result<DiagonalBound> {
    let KernelForm::Diagonal { phis, g } = &kernel.form else {
        return Err(Error::NotDiagonal);
    };
    if v.len() != kernel.rows {
        return Err(Error::DimensionMismatch { expected: kernel.rows, got: v.len() });
    }
    if model.dim != kernel.cols {
        return Err(Error::DimensionMismatch { expected: kernel.cols, got: model.dim });
    }
    let fact = small_jump_factorization(model, alpha_cut)?;
    let grid = kernel.grid_on(horizon);
    let mut bound = 0.0;
    let mut tv2 = Vec::with_capacity(phis.len());
    let mut second_moments = Vec::with_capacity(phis.len());
    for (k, phi) in phis.iter().enumerate() {
        let samples: Vec<f64> = grid.iter().map(|s| phi(*s)).collect();
        let t = tv2_scalar(&samples).value;
        let gk: Vec<f64> = g.column(k).iter().copied().collect();
        let m2 = fact.quadratic_form(&gk).max(0.0);
        bound += v[k].abs() * t * m2.sqrt();
        tv2.push(t);
        second_moments.push(m2);
    }
    Ok(DiagonalBound { bound: kappa() * (2.0 * horizon).sqrt() * bound, tv2, second_moments })
}

/// `kappa sqrt(2T) sum_k |v_k| |phi_k|_TV2 (int_{|u|<=alpha} <u, Ge_k>^2 nu(du))^(1/2)`.
pub fn maximal_bound_diagonal(kernel: &Kernel, model: &LevyModel, alpha_cut: f64, v: &[f64], horizon: f64) -> Result<f64> {
    Ok(maximal_bound_diagonal_terms(kernel, model, alpha_cut, v, horizon)?.bound)
}

/// `exp(int_0^T Psi(F*(s) beta v) ds)` by the trapezoid rule on the kernel grid.
pub fn char_function_of_integral(kernel: &Kernel, model: &LevyModel, v: &[f64], beta: f64, horizon: f64) -> Result<Complex64> {
    if v.len() != kernel.rows {
        return Err(Error::DimensionMismatch { expected: kernel.rows, got: v.len() });
    }
    kernel.check_covers(horizon)?;
    let bv: Vec<f64> = v.iter().map(|x| beta * x).collect();
    let grid = kernel.grid_on(horizon);
    let psi: Vec<Complex64> = grid.iter().map(|s| model.symbol(&kernel.adjoint_apply(*s, &bv))).collect::<Result<_>>()?;
    let mut integral = Complex64::new(0.0, 0.0);
    for i in 0..grid.len() - 1 {
        integral += (psi[i] + psi[i + 1]) * (0.5 * (grid[i + 1] - grid[i]));
    }
    Ok(integral.exp())
}
