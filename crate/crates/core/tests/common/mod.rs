//! Shared numeric oracles for the integration tests: goodness-of-fit
//! statistics, reference CDFs, and quadrature.

#![allow(dead_code)]

use inflaquant::special::{lower_reg_gamma, std_normal_cdf};

/// Kolmogorov-Smirnov statistic of an ascending-sorted sample against a
/// reference CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        let f = cdf(*v);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov-Smirnov p-value with a finite-sample size
/// correction of the argument.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        p += 2.0 * sign * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
    }
    p.clamp(0.0, 1.0)
}

/// Closed-form inverse-Gaussian CDF.
pub fn inverse_gaussian_cdf(x: f64, mu: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = (lambda / x).sqrt() * (x / mu - 1.0);
    let b = -(lambda / x).sqrt() * (x / mu + 1.0);
    let tail = (2.0 * lambda / mu).exp() * std_normal_cdf(b);
    (std_normal_cdf(a) + tail).clamp(0.0, 1.0)
}

/// Inverse-gamma CDF with shape `a` and scale `b` (upper incomplete
/// gamma of the reciprocal).
pub fn inverse_gamma_cdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    1.0 - lower_reg_gamma(a, b / x)
}

/// Gamma CDF with shape `a` and rate `r`.
pub fn gamma_cdf(x: f64, a: f64, r: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    lower_reg_gamma(a, r * x)
}

fn simpson_slice(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_slice(a, m, fa, flm, fm);
    let right = simpson_slice(m, b, fm, frm, fb);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
        refined + (refined - whole) / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature on [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_slice(a, b, fa, fm, fb);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Adaptive Simpson over a fixed initial panel grid, so sharply
/// concentrated integrands cannot hide between the first probe points.
pub fn integrate_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            integrate(&f, lo, lo + h, tol / panels as f64)
        })
        .sum()
}
