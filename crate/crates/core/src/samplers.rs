//! Parameter updates: blockwise IWLS Metropolis-Hastings for coefficients,
//! dual-averaging step-size adaptation, and exact Gibbs draws for
//! smoothing variances, latent mixture weights, and the precision.
//!
//! Each coefficient block is proposed from a Gaussian whose mean shifts the
//! current value by `eps^2/2` times the Fisher-preconditioned score and
//! whose covariance is `eps^2` times the inverse Fisher matrix, both
//! rebuilt at the proposal for the reverse density.

use crate::error::{Error, Result};
use crate::linalg::{quad_form, weighted_cross, Cholesky};
use crate::model::{
    augmented_continuous_loglik, discrete_loglik, link_probs, linear_predictor, log_prior_block,
    InflationKind, ModelSpec, ModelState, ObservationSet,
};
use crate::special::logistic;
use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Residuals this close to zero are pushed away before the latent-weight
/// draw; the inverse-Gaussian mean diverges at an exact zero.
pub const RESIDUAL_CLAMP: f64 = 1e-12;

/// Which part of a predictor an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockId {
    Intercept,
    Block(usize),
}

/// A (predictor, block) address used by the update schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRef {
    pub pred_id: usize,
    pub block: BlockId,
}

/// Canonical parameter-name prefix for a block, e.g. `pred2.f(x1)`.
pub fn block_label(spec: &ModelSpec, at: BlockRef) -> String {
    match at.block {
        BlockId::Intercept => format!("pred{}.intercept", at.pred_id),
        BlockId::Block(k) => {
            let label = spec
                .predictor(at.pred_id)
                .map(|p| p.blocks[k].label.as_str())
                .unwrap_or("?");
            format!("pred{}.{}", at.pred_id, label)
        }
    }
}

/// Score vector and Fisher information of one block's full conditional.
#[derive(Debug, Clone)]
pub struct GradHess {
    pub score: Array1<f64>,
    pub fisher: Array2<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Family {
    /// Zero-boundary category of a three-category multinomial.
    MultinomialCat0,
    /// One-boundary category of a three-category multinomial.
    MultinomialCat1,
    /// Single inflated boundary against the interior.
    Binary,
    /// Conditionally Gaussian interior part.
    Continuous,
}

fn family_of(spec: &ModelSpec, pred_id: usize) -> Family {
    match (pred_id, spec.inflation) {
        (2, _) => Family::Continuous,
        (0, InflationKind::ZeroAndOne) => Family::MultinomialCat0,
        (1, InflationKind::ZeroAndOne) => Family::MultinomialCat1,
        (0, InflationKind::ZeroOnly) => Family::Binary,
        (1, InflationKind::OneOnly) => Family::Binary,
        _ => unreachable!("validated model has no other predictor families"),
    }
}

fn boundary_indicator<'a>(spec: &ModelSpec, obs: &'a ObservationSet, pred_id: usize) -> &'a Array1<f64> {
    match (pred_id, spec.inflation) {
        (0, _) => obs.ind0(),
        (1, _) => obs.ind1(),
        _ => unreachable!("indicator requested for the continuous part"),
    }
}

/// Basis matrix of the addressed block; intercepts use a ones column.
fn block_basis(spec: &ModelSpec, at: BlockRef, n: usize) -> Array2<f64> {
    match at.block {
        BlockId::Intercept => Array2::from_elem((n, 1), 1.0),
        BlockId::Block(k) => spec.predictor(at.pred_id).unwrap().blocks[k].basis.to_owned(),
    }
}

fn block_coef(state: &ModelState, at: BlockRef) -> Array1<f64> {
    let p = state.predictor(at.pred_id).unwrap();
    match at.block {
        BlockId::Intercept => Array1::from_vec(vec![p.intercept]),
        BlockId::Block(k) => p.coefs[k].clone(),
    }
}

fn set_block_coef(state: &mut ModelState, at: BlockRef, value: &Array1<f64>) {
    let p = state.predictor_mut(at.pred_id).unwrap();
    match at.block {
        BlockId::Intercept => p.intercept = value[0],
        BlockId::Block(k) => p.coefs[k].assign(value),
    }
}

/// Penalty matrix, rank, and smoothing variance of the addressed block;
/// `None` for intercepts and unpenalized blocks (flat prior).
fn block_prior<'a>(
    spec: &'a ModelSpec,
    state: &ModelState,
    at: BlockRef,
) -> Option<(&'a Array2<f64>, usize, f64)> {
    let BlockId::Block(k) = at.block else { return None };
    let block = &spec.predictor(at.pred_id).unwrap().blocks[k];
    if !block.is_penalized() {
        return None;
    }
    let nu_sq = state.predictor(at.pred_id).unwrap().nu_sq[k]
        .expect("penalized block carries a smoothing variance");
    Some((&block.penalty, block.penalty_rank, nu_sq))
}

/// Score and Fisher information at the block's current coefficients.
pub fn score_fisher(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &ModelState,
    at: BlockRef,
) -> Result<GradHess> {
    let n = obs.n();
    let eta = linear_predictor(
        spec.predictor(at.pred_id).unwrap(),
        state.predictor(at.pred_id).unwrap(),
        n,
    );
    let basis = block_basis(spec, at, n);
    let beta = block_coef(state, at);
    score_fisher_at(spec, obs, state, at, &basis, &eta.view(), &beta.view())
}

/// Score and Fisher at an explicit predictor value and coefficient.
fn score_fisher_at(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &ModelState,
    at: BlockRef,
    basis: &Array2<f64>,
    eta: &ArrayView1<f64>,
    beta: &ArrayView1<f64>,
) -> Result<GradHess> {
    let n = obs.n();
    let (mut score, mut fisher) = match family_of(spec, at.pred_id) {
        Family::MultinomialCat0 | Family::MultinomialCat1 => {
            let other_id = if at.pred_id == 0 { 1 } else { 0 };
            let eta_other = linear_predictor(
                spec.predictor(other_id).unwrap(),
                state.predictor(other_id).unwrap(),
                n,
            );
            let (p0, p1, _) = if at.pred_id == 0 {
                link_probs(Some(eta), Some(&eta_other.view()))?
            } else {
                link_probs(Some(&eta_other.view()), Some(eta))?
            };
            let p = if at.pred_id == 0 { p0 } else { p1 };
            let resid = boundary_indicator(spec, obs, at.pred_id) - &p;
            let weight = &p * &(1.0 - &p);
            (basis.t().dot(&resid), weighted_cross(&basis.view(), &weight.view()))
        }
        Family::Binary => {
            let p = eta.mapv(logistic);
            let resid = boundary_indicator(spec, obs, at.pred_id) - &p;
            let weight = &p * &(1.0 - &p);
            (basis.t().dot(&resid), weighted_cross(&basis.view(), &weight.view()))
        }
        Family::Continuous => {
            let n_c = obs.n_interior();
            let l = basis.ncols();
            let xi = spec.xi();
            let scale = state.delta_sq / spec.sigma_sq();
            let mut sub_basis = Array2::<f64>::zeros((n_c, l));
            let mut wr = Array1::<f64>::zeros(n_c);
            let mut inv_w = Array1::<f64>::zeros(n_c);
            for (j, &row) in obs.interior_idx().iter().enumerate() {
                sub_basis.row_mut(j).assign(&basis.row(row));
                inv_w[j] = 1.0 / state.w[j];
                wr[j] = (obs.y_logit()[j] - eta[row] - xi * state.w[j]) * inv_w[j];
            }
            let score = sub_basis.t().dot(&wr) * scale;
            let fisher = weighted_cross(&sub_basis.view(), &inv_w.view()) * scale;
            (score, fisher)
        }
    };
    if let Some((penalty, _rank, nu_sq)) = block_prior(spec, state, at) {
        score = score - penalty.dot(beta) / nu_sq;
        fisher = fisher + penalty / nu_sq;
    }
    if score.iter().any(|v| !v.is_finite()) || fisher.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            block: block_label(spec, at),
            what: "score or Fisher information".into(),
        });
    }
    Ok(GradHess { score, fisher })
}

/// Log full conditional of one block at a candidate coefficient value:
/// the relevant likelihood part plus the block's own prior.
pub fn block_conditional(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &ModelState,
    at: BlockRef,
    candidate: &ArrayView1<f64>,
) -> f64 {
    let n = obs.n();
    let basis = block_basis(spec, at, n);
    let current = block_coef(state, at);
    let base_eta = linear_predictor(
        spec.predictor(at.pred_id).unwrap(),
        state.predictor(at.pred_id).unwrap(),
        n,
    );
    let eta = &base_eta + &basis.dot(&(candidate - &current));
    conditional_from_eta(spec, obs, state, at, &eta.view(), candidate)
}

fn conditional_from_eta(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &ModelState,
    at: BlockRef,
    eta: &ArrayView1<f64>,
    beta: &ArrayView1<f64>,
) -> f64 {
    let n = obs.n();
    let lik = match family_of(spec, at.pred_id) {
        Family::MultinomialCat0 | Family::MultinomialCat1 => {
            let other_id = if at.pred_id == 0 { 1 } else { 0 };
            let eta_other = linear_predictor(
                spec.predictor(other_id).unwrap(),
                state.predictor(other_id).unwrap(),
                n,
            );
            let (p0, p1, pc) = if at.pred_id == 0 {
                link_probs(Some(eta), Some(&eta_other.view())).expect("finite predictors")
            } else {
                link_probs(Some(&eta_other.view()), Some(eta)).expect("finite predictors")
            };
            discrete_loglik(obs, &p0.view(), &p1.view(), &pc.view())
        }
        Family::Binary => {
            let (p0, p1, pc) = if at.pred_id == 0 {
                link_probs(Some(eta), None).expect("finite predictors")
            } else {
                link_probs(None, Some(eta)).expect("finite predictors")
            };
            discrete_loglik(obs, &p0.view(), &p1.view(), &pc.view())
        }
        Family::Continuous => augmented_continuous_loglik(
            obs,
            eta,
            &state.w.view(),
            state.delta_sq,
            spec.xi(),
            spec.sigma_sq(),
        ),
    };
    let prior = match block_prior(spec, state, at) {
        Some((penalty, rank, nu_sq)) => {
            log_prior_block(beta, &penalty.view(), rank, Some(nu_sq))
        }
        None => 0.0,
    };
    lik + prior
}

/// Factor a proposal precision, escalating a relative diagonal jitter from
/// 1e-8 to 1e-2 of the mean diagonal before giving up.
pub fn factor_with_jitter(fisher: &Array2<f64>, label: &str) -> Result<(Cholesky, Array2<f64>)> {
    if let Some(chol) = Cholesky::new(&fisher.view()) {
        return Ok((chol, fisher.clone()));
    }
    let d = fisher.nrows();
    let base = (fisher.diag().iter().map(|v| v.abs()).sum::<f64>() / d as f64).max(f64::MIN_POSITIVE);
    let mut level = 1e-8;
    while level <= 1e-2 {
        let jittered = fisher + &(Array2::<f64>::eye(d) * (level * base));
        if let Some(chol) = Cholesky::new(&jittered.view()) {
            return Ok((chol, jittered));
        }
        level *= 10.0;
    }
    Err(Error::CholeskyFailure { block: label.into() })
}

/// Result of one Metropolis-Hastings block update.
#[derive(Debug, Clone, Copy)]
pub enum MhOutcome {
    /// The block carries no information at all (empty data, flat prior);
    /// nothing was proposed.
    Skipped,
    Proposed { accepted: bool, accept_prob: f64 },
}

/// One IWLS Metropolis-Hastings update of the addressed block, writing the
/// accepted coefficient back into `state`.
pub fn iwls_mh_update<R: Rng>(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &mut ModelState,
    at: BlockRef,
    eps: f64,
    rng: &mut R,
) -> Result<MhOutcome> {
    let n = obs.n();
    let label = block_label(spec, at);
    let basis = block_basis(spec, at, n);
    let beta = block_coef(state, at);
    let d = beta.len();
    let eta = linear_predictor(
        spec.predictor(at.pred_id).unwrap(),
        state.predictor(at.pred_id).unwrap(),
        n,
    );

    let gh = score_fisher_at(spec, obs, state, at, &basis, &eta.view(), &beta.view())?;
    if gh.fisher.iter().all(|v| *v == 0.0) && gh.score.iter().all(|v| *v == 0.0) {
        return Ok(MhOutcome::Skipped);
    }
    let (chol, fisher_j) = factor_with_jitter(&gh.fisher, &label)?;

    // Forward proposal: mean = beta + (eps^2/2) F^{-1} s, cov = eps^2 F^{-1}.
    let drift = chol.solve(&gh.score.view());
    let mean = &beta + &(&drift * (eps * eps / 2.0));
    let z = Array1::from_shape_fn(d, |_| rng.sample::<f64, _>(StandardNormal));
    let beta_star = &mean + &(chol.inv_sqrt_mul(&z.view()) * eps);

    let diff_fwd = &beta_star - &mean;
    let log_q_fwd = 0.5 * chol.log_det() - d as f64 * eps.ln()
        - quad_form(&fisher_j.view(), &diff_fwd.view()) / (2.0 * eps * eps);

    // Reverse proposal rebuilt at the candidate.
    let eta_star = &eta + &basis.dot(&(&beta_star - &beta));
    let gh_star = score_fisher_at(spec, obs, state, at, &basis, &eta_star.view(), &beta_star.view())?;
    let (chol_star, fisher_star_j) = factor_with_jitter(&gh_star.fisher, &label)?;
    let drift_star = chol_star.solve(&gh_star.score.view());
    let mean_star = &beta_star + &(&drift_star * (eps * eps / 2.0));
    let diff_rev = &beta - &mean_star;
    let log_q_rev = 0.5 * chol_star.log_det() - d as f64 * eps.ln()
        - quad_form(&fisher_star_j.view(), &diff_rev.view()) / (2.0 * eps * eps);

    let target_cur = conditional_from_eta(spec, obs, state, at, &eta.view(), &beta.view());
    let target_star = conditional_from_eta(spec, obs, state, at, &eta_star.view(), &beta_star.view());

    let log_alpha = target_star - target_cur + log_q_rev - log_q_fwd;
    if log_alpha.is_nan() {
        return Err(Error::NonFinite { block: label, what: "acceptance ratio".into() });
    }
    let accept_prob = log_alpha.exp().min(1.0);
    let accepted = rng.random::<f64>() < accept_prob;
    if accepted {
        set_block_coef(state, at, &beta_star);
    }
    Ok(MhOutcome::Proposed { accepted, accept_prob })
}

/// Dual-averaging step-size adaptation toward a target acceptance rate.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    t: u64,
    target: f64,
    gamma: f64,
    t0: f64,
    kappa: f64,
}

/// Acceptance rate the step-size adaptation aims for.
pub const MH_TARGET_ACCEPT: f64 = 0.8;

/// Initial step size for all coefficient blocks.
pub const EPS_INIT: f64 = 0.1;

impl DualAveraging {
    pub fn new(eps_init: f64, target: f64) -> Self {
        Self {
            mu: (10.0 * eps_init).ln(),
            log_eps: eps_init.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            t: 0,
            target,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
        }
    }

    /// Step size to use for the next proposal while adapting.
    pub fn current_eps(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Smoothed step size to freeze after adaptation ends.
    pub fn averaged_eps(&self) -> f64 {
        self.log_eps_bar.exp()
    }

    /// Number of acceptance statistics folded in so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Fold in the acceptance probability of one proposal.
    pub fn step(&mut self, accept_prob: f64) {
        self.t += 1;
        let t = self.t as f64;
        let eta = 1.0 / (t + self.t0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob);
        self.log_eps = self.mu - t.sqrt() / self.gamma * self.h_bar;
        let weight = t.powf(-self.kappa);
        self.log_eps_bar = weight * self.log_eps + (1.0 - weight) * self.log_eps_bar;
    }
}

/// Conjugate update of one block's smoothing variance:
/// inverse-gamma with shape `a + rank/2` and scale `b + beta' K beta / 2`.
pub fn gibbs_smoothing_variance<R: Rng>(
    beta: &ArrayView1<f64>,
    penalty: &ndarray::ArrayView2<f64>,
    rank: usize,
    a: f64,
    b: f64,
    rng: &mut R,
) -> f64 {
    let shape = a + rank as f64 / 2.0;
    let scale_ig = b + quad_form(penalty, beta).max(0.0) / 2.0;
    let g = Gamma::new(shape, 1.0 / scale_ig)
        .expect("positive inverse-gamma parameters")
        .sample(rng);
    1.0 / g.max(f64::MIN_POSITIVE)
}

/// Inverse-Gaussian draw via the squared-normal transformation with a
/// final uniform rejection between the two roots.
pub fn sample_inverse_gaussian<R: Rng>(mu: f64, lambda: f64, rng: &mut R) -> f64 {
    assert!(
        mu > 0.0 && lambda > 0.0 && mu.is_finite() && lambda.is_finite(),
        "inverse-Gaussian parameters must be positive and finite"
    );
    let z: f64 = rng.sample(StandardNormal);
    let v = z * z;
    // Smaller root of the transformation quadratic. The textbook form
    // mu + mu^2 v / (2 lambda) - (mu / (2 lambda)) sqrt(4 mu lambda v + mu^2 v^2)
    // cancels catastrophically when mu*v >> lambda (it can round to zero or
    // below, sending the rejection branch to mu^2/0 = inf); this algebraically
    // equal product form stays strictly positive.
    let mv = mu * v;
    let s = (4.0 * mu * lambda * v + mv * mv).sqrt();
    let mut x = 4.0 * mu * mu * lambda * v / ((s + mv) * (s + mv));
    if !(x > 0.0) || !x.is_finite() {
        // v underflowed to (near) zero: the draw degenerates to mu.
        x = mu;
    }
    let u: f64 = rng.random();
    if u <= mu / (mu + x) {
        x
    } else {
        mu * mu / x
    }
}

/// Inverse-Gaussian parameters of the reciprocal latent weight given a
/// raw residual on the logit scale.
pub fn latent_weight_params(residual: f64, delta_sq: f64, xi: f64, sigma_sq: f64) -> (f64, f64) {
    let k = xi * xi + 2.0 * sigma_sq;
    (k.sqrt() / residual.abs(), delta_sq * k / sigma_sq)
}

/// Refresh every latent mixture weight from its inverse-Gaussian full
/// conditional. Residuals at (almost) zero are clamped to +-1e-12 first;
/// the number of clamped residuals is returned.
pub fn gibbs_latent_weights<R: Rng>(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &mut ModelState,
    eta2: &ArrayView1<f64>,
    rng: &mut R,
) -> usize {
    let xi = spec.xi();
    let sigma_sq = spec.sigma_sq();
    let mut clamped = 0usize;
    for (j, &row) in obs.interior_idx().iter().enumerate() {
        let mut r = obs.y_logit()[j] - eta2[row];
        if r.abs() < RESIDUAL_CLAMP {
            r = if r < 0.0 { -RESIDUAL_CLAMP } else { RESIDUAL_CLAMP };
            clamped += 1;
        }
        let (mu, lambda) = latent_weight_params(r, state.delta_sq, xi, sigma_sq);
        let v = sample_inverse_gaussian(mu, lambda, rng);
        state.w[j] = (1.0 / v).max(f64::MIN_POSITIVE);
    }
    clamped
}

/// Conjugate update of the working-likelihood precision: Gamma with shape
/// `a0 + 3 n_interior / 2` and rate `b0 + sum(w) + sum(r^2 / (2 sigma_sq w))`
/// where `r` is the mixture-centered residual. With no interior data this
/// is a draw from the prior.
pub fn gibbs_delta_sq<R: Rng>(
    spec: &ModelSpec,
    obs: &ObservationSet,
    state: &ModelState,
    eta2: &ArrayView1<f64>,
    rng: &mut R,
) -> f64 {
    let xi = spec.xi();
    let sigma_sq = spec.sigma_sq();
    let n_c = obs.n_interior();
    let shape = spec.delta_a + 1.5 * n_c as f64;
    let mut rate = spec.delta_b;
    for (j, &row) in obs.interior_idx().iter().enumerate() {
        let w = state.w[j];
        let r = obs.y_logit()[j] - eta2[row] - xi * w;
        rate += w + r * r / (2.0 * sigma_sq * w);
    }
    let scale = 1.0 / rate;
    if !(scale > 0.0) || !scale.is_finite() {
        // Overflowed rate (degenerate latent weights): hand the caller a
        // non-finite draw so it aborts the chain instead of panicking here.
        return f64::NAN;
    }
    Gamma::new(shape, scale)
        .expect("positive Gamma parameters")
        .sample(rng)
}
