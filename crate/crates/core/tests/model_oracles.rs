//! Quadrature oracles for the working likelihood: normalization, the
//! quantile identity, the closed-form CDF, and the equivalence of the
//! exponential-Gaussian mixture with the asymmetric Laplace density.

mod common;

use common::{integrate, integrate_panels};
use inflaquant::model::ald_logpdf;
use inflaquant::simulate::ald_cdf;

#[test]
fn ald_density_integrates_to_one() {
    for (delta_sq, tau) in [(0.5, 0.1), (9.0, 0.5), (2.0, 0.73), (9.0, 0.9)] {
        let eta = 0.4;
        let mass = integrate(
            |v| ald_logpdf(v, eta, delta_sq, tau).exp(),
            eta - 2500.0,
            eta + 2500.0,
            1e-12,
        );
        assert!((mass - 1.0).abs() < 1e-8, "delta_sq={delta_sq}, tau={tau}: mass {mass}");
    }
}

#[test]
fn location_is_the_tau_quantile() {
    for (delta_sq, tau) in [(9.0, 0.1), (9.0, 0.5), (1.0, 0.8)] {
        let eta = -0.7;
        let below = integrate(
            |v| ald_logpdf(v, eta, delta_sq, tau).exp(),
            eta - 3000.0,
            eta,
            1e-12,
        );
        assert!((below - tau).abs() < 1e-6, "delta_sq={delta_sq}, tau={tau}: {below}");
    }
}

#[test]
fn closed_form_cdf_matches_quadrature() {
    let (delta_sq, tau) = (3.0, 0.35);
    for v in [-2.0, -0.3, 0.0, 0.2, 1.5, 4.0] {
        let quad = integrate(
            |u| ald_logpdf(u, 0.0, delta_sq, tau).exp(),
            v - 2500.0,
            v,
            1e-13,
        );
        let closed = ald_cdf(v, delta_sq, tau);
        assert!((quad - closed).abs() < 1e-8, "v={v}: {quad} vs {closed}");
    }
}

/// Marginalizing the latent exponential weight out of the conditionally
/// Gaussian representation must recover the asymmetric Laplace density.
#[test]
fn mixture_marginalizes_to_the_asymmetric_laplace() {
    for (delta_sq, tau) in [(9.0, 0.5), (9.0, 0.1), (1.7, 0.65)] {
        let xi = (1.0 - 2.0 * tau) / (tau * (1.0 - tau));
        let sigma_sq = 2.0 / (tau * (1.0 - tau));
        let eta = 0.25;
        for y in [-1.2, -0.1, 0.25, 0.6, 2.0] {
            // Substitute w = exp(u) so the quadrature grid resolves both
            // the small-w spike and the exponential tail.
            let integrand = |u: f64| {
                let w = u.exp();
                let var = sigma_sq * w / delta_sq;
                let r = y - eta - xi * w;
                let log_gauss = -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                    - r * r / (2.0 * var);
                let log_prior = delta_sq.ln() - delta_sq * w;
                (log_gauss + log_prior + u).exp()
            };
            let mixture = integrate_panels(integrand, -80.0, 12.0, 256, 1e-13);
            let direct = ald_logpdf(y, eta, delta_sq, tau).exp();
            assert!(
                (mixture - direct).abs() < 1e-8 * direct.max(1.0),
                "delta_sq={delta_sq}, tau={tau}, y={y}: mixture {mixture} vs density {direct}"
            );
        }
    }
}
