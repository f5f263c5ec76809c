//! Symmetric and isotropic stable variates and constants.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::gamma::{gamma, ln_gamma};

/// Chambers–Mallows–Stuck draw with `E exp(iuX) = exp(-|u|^alpha)`.
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Kanter's representation of a positive stable variate with
/// `E exp(-s S) = exp(-s^a)`, `0 < a < 1`.
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    // keep U away from the endpoints where sin(pi U) vanishes
    let u: f64 = rng.random::<f64>().clamp(1e-300, 1.0 - 1e-16);
    let w: f64 = Exp1.sample(rng);
    (a * PI * u).sin() / (PI * u).sin().powf(1.0 / a) * (((1.0 - a) * PI * u).sin() / w).powf((1.0 - a) / a)
}

/// One increment of an isotropic stable process with symbol `-scale |u|^alpha`
/// over a cell of length `dt`, written into `out`.
///
/// `d = 1` uses Chambers–Mallows–Stuck; `d >= 2` subordinates a Brownian motion
/// by an `alpha/2`-stable variate.
pub fn isotropic_increment<R: Rng + ?Sized>(alpha: f64, scale: f64, dt: f64, rng: &mut R, out: &mut [f64]) {
    let c = scale * dt;
    if out.len() == 1 {
        out[0] = c.powf(1.0 / alpha) * symmetric_stable(alpha, rng);
        return;
    }
    subordinated_increment(alpha, c, rng, out);
}

/// Sub-Gaussian route `sqrt(A) G` with `A = 2 c^(2/alpha) S`, valid in any dimension.
pub fn subordinated_increment<R: Rng + ?Sized>(alpha: f64, c: f64, rng: &mut R, out: &mut [f64]) {
    let s = if alpha >= 2.0 { 1.0 } else { positive_stable(alpha / 2.0, rng) };
    let a = 2.0 * c.powf(2.0 / alpha) * s;
    let root = a.sqrt();
    for o in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *o = root * g;
    }
}

/// `E |theta_1|^alpha` for `theta` uniform on the unit sphere of R^d.
pub fn sphere_abs_moment(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    (ln_gamma(d / 2.0) + ln_gamma((alpha + 1.0) / 2.0) - ln_gamma((d + alpha) / 2.0)).exp() / PI.sqrt()
}

/// `int_0^inf (1 - cos x) x^(-1-alpha) dx * alpha = Gamma(1 - alpha) cos(pi alpha / 2)`,
/// continued through `alpha = 1` where it equals `pi / 2`.
pub fn cosine_integral_constant(alpha: f64) -> f64 {
    let e = 1.0 - alpha;
    if e.abs() < 1e-6 {
        // cos(pi alpha / 2) / (1 - alpha) -> pi/2, Gamma(1 + e) ~ 1 - gamma_E e
        return PI / 2.0 * (1.0 - 0.5772156649015329 * e);
    }
    gamma(1.0 + e) / e * (PI * alpha / 2.0).cos()
}

/// Tail constant `c` with `nu(|r| > rho) = c rho^-alpha` for the isotropic
/// stable law with symbol `-scale |u|^alpha` in R^d.
pub fn tail_constant(d: usize, alpha: f64, scale: f64) -> f64 {
    scale / (sphere_abs_moment(d, alpha) * cosine_integral_constant(alpha))
}

/// Jump intensity above `rho`: `nu(|r| > rho)`.
pub fn tail_mass(d: usize, alpha: f64, scale: f64, rho: f64) -> f64 {
    tail_constant(d, alpha, scale) * rho.powf(-alpha)
}

/// Per-coordinate variance `int_{|r| <= rho} r_1^2 nu(dr)`; the full truncated
/// second-moment matrix is this times the identity.
pub fn truncated_variance(d: usize, alpha: f64, scale: f64, rho: f64) -> f64 {
    let c = tail_constant(d, alpha, scale);
    c * alpha * rho.powf(2.0 - alpha) / (2.0 - alpha) / d as f64
}
