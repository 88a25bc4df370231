//! Model core: two-part likelihood for bounded responses with boundary
//! inflation.
//!
//! The discrete part assigns multinomial-logit probabilities to the
//! boundary categories {0}, {1} against the continuous interior; the
//! continuous part models the logit-transformed interior response with an
//! asymmetric-Laplace working likelihood whose location is the target
//! quantile. A location-scale mixture representation over exponential
//! latent weights makes the continuous part conditionally Gaussian.

use crate::design::DesignBlock;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, log_sum_exp, logit};
use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

/// Which response boundaries carry point mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InflationKind {
    ZeroOnly,
    OneOnly,
    ZeroAndOne,
}

impl InflationKind {
    pub fn has_zero(self) -> bool {
        matches!(self, InflationKind::ZeroOnly | InflationKind::ZeroAndOne)
    }

    pub fn has_one(self) -> bool {
        matches!(self, InflationKind::OneOnly | InflationKind::ZeroAndOne)
    }
}

/// Structured additive predictor: an implicit intercept plus term blocks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub blocks: Vec<DesignBlock>,
}

impl PredictorSpec {
    pub fn new(blocks: Vec<DesignBlock>) -> Self {
        Self { blocks }
    }
}

/// Default Gamma(shape, rate) prior for the working-likelihood precision.
pub const DELTA_PRIOR_DEFAULT: (f64, f64) = (0.001, 0.001);

/// Full model specification for one quantile level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub inflation: InflationKind,
    /// Target quantile of the logit-scale continuous response.
    pub tau: f64,
    /// Predictor for the probability of the zero boundary (index 0).
    pub discrete0: Option<PredictorSpec>,
    /// Predictor for the probability of the one boundary (index 1).
    pub discrete1: Option<PredictorSpec>,
    /// Predictor for the conditional quantile on the interior (index 2).
    pub continuous: PredictorSpec,
    /// Gamma shape of the precision prior.
    pub delta_a: f64,
    /// Gamma rate of the precision prior.
    pub delta_b: f64,
}

impl ModelSpec {
    pub fn new(
        inflation: InflationKind,
        tau: f64,
        discrete0: Option<PredictorSpec>,
        discrete1: Option<PredictorSpec>,
        continuous: PredictorSpec,
    ) -> Self {
        Self {
            inflation,
            tau,
            discrete0,
            discrete1,
            continuous,
            delta_a: DELTA_PRIOR_DEFAULT.0,
            delta_b: DELTA_PRIOR_DEFAULT.1,
        }
    }

    /// Mixture drift constant (1 - 2 tau) / (tau (1 - tau)).
    pub fn xi(&self) -> f64 {
        (1.0 - 2.0 * self.tau) / (self.tau * (1.0 - self.tau))
    }

    /// Mixture scale constant 2 / (tau (1 - tau)).
    pub fn sigma_sq(&self) -> f64 {
        2.0 / (self.tau * (1.0 - self.tau))
    }

    /// Predictor by index: 0 and 1 are the boundary parts, 2 the interior.
    pub fn predictor(&self, id: usize) -> Option<&PredictorSpec> {
        match id {
            0 => self.discrete0.as_ref(),
            1 => self.discrete1.as_ref(),
            2 => Some(&self.continuous),
            _ => None,
        }
    }

    /// Check structural consistency against a data set of `n` rows.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidArgument {
                name: "tau".into(),
                reason: "quantile level must lie strictly inside (0, 1)".into(),
            });
        }
        if !(self.delta_a > 0.0 && self.delta_b > 0.0) {
            return Err(Error::InvalidArgument {
                name: "delta prior".into(),
                reason: "Gamma prior parameters must be positive".into(),
            });
        }
        if self.discrete0.is_some() != self.inflation.has_zero() {
            return Err(Error::InvalidModel(
                "zero-boundary predictor must be present exactly when zeros are inflated".into(),
            ));
        }
        if self.discrete1.is_some() != self.inflation.has_one() {
            return Err(Error::InvalidModel(
                "one-boundary predictor must be present exactly when ones are inflated".into(),
            ));
        }
        for id in 0..3 {
            if let Some(pred) = self.predictor(id) {
                let mut labels: Vec<&str> = pred.blocks.iter().map(|b| b.label.as_str()).collect();
                labels.sort_unstable();
                labels.dedup();
                if labels.len() != pred.blocks.len() {
                    return Err(Error::InvalidModel(format!(
                        "duplicate block labels in predictor {id}"
                    )));
                }
                for block in &pred.blocks {
                    block.validate()?;
                    if block.basis.nrows() != n {
                        return Err(Error::DimensionMismatch {
                            context: format!("basis rows of `{}`", block.label),
                            expected: n,
                            got: block.basis.nrows(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Responses split into boundary indicators and the interior subset.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    y: Array1<f64>,
    ind0: Array1<f64>,
    ind1: Array1<f64>,
    ind_c: Array1<f64>,
    interior_idx: Vec<usize>,
    y_logit: Array1<f64>,
}

/// Validate responses against the inflation kind and split them into the
/// boundary categories and the logit-transformed interior. Boundary
/// membership is decided by exact comparison with 0.0 and 1.0. Interior
/// logits beyond +-30 are reported as a data audit warning.
pub fn partition_observations(
    y: &ArrayView1<f64>,
    inflation: InflationKind,
    warnings: &mut Vec<String>,
) -> Result<ObservationSet> {
    let n = y.len();
    if n == 0 {
        return Err(Error::InvalidData { row: 0, reason: "no observations".into() });
    }
    let mut ind0 = Array1::<f64>::zeros(n);
    let mut ind1 = Array1::<f64>::zeros(n);
    let mut ind_c = Array1::<f64>::zeros(n);
    let mut interior_idx = Vec::new();
    let mut y_logit = Vec::new();
    let mut extreme_rows = Vec::new();
    for (row, &v) in y.iter().enumerate() {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidData {
                row,
                reason: format!("response {v} outside [0, 1]"),
            });
        }
        if v == 0.0 {
            if !inflation.has_zero() {
                return Err(Error::InvalidData {
                    row,
                    reason: "response is 0 but the model has no zero inflation".into(),
                });
            }
            ind0[row] = 1.0;
        } else if v == 1.0 {
            if !inflation.has_one() {
                return Err(Error::InvalidData {
                    row,
                    reason: "response is 1 but the model has no one inflation".into(),
                });
            }
            ind1[row] = 1.0;
        } else {
            ind_c[row] = 1.0;
            interior_idx.push(row);
            let lv = logit(v);
            if lv.abs() > 30.0 {
                extreme_rows.push(row);
            }
            y_logit.push(lv);
        }
    }
    if !extreme_rows.is_empty() {
        warnings.push(format!(
            "interior responses with |logit| > 30 at rows {extreme_rows:?}; \
             estimates near the boundary may be unstable"
        ));
    }
    Ok(ObservationSet {
        y: y.to_owned(),
        ind0,
        ind1,
        ind_c,
        interior_idx,
        y_logit: Array1::from_vec(y_logit),
    })
}

impl ObservationSet {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_zero(&self) -> usize {
        self.ind0.iter().filter(|v| **v == 1.0).count()
    }

    pub fn n_one(&self) -> usize {
        self.ind1.iter().filter(|v| **v == 1.0).count()
    }

    pub fn n_interior(&self) -> usize {
        self.interior_idx.len()
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn ind0(&self) -> &Array1<f64> {
        &self.ind0
    }

    pub fn ind1(&self) -> &Array1<f64> {
        &self.ind1
    }

    pub fn ind_interior(&self) -> &Array1<f64> {
        &self.ind_c
    }

    /// Row indices of interior observations, in data order.
    pub fn interior_idx(&self) -> &[usize] {
        &self.interior_idx
    }

    /// Logit-transformed interior responses, aligned with `interior_idx`.
    pub fn y_logit(&self) -> &Array1<f64> {
        &self.y_logit
    }
}

/// Coefficients of one predictor: intercept, per-block coefficient vectors,
/// and per-block smoothing variances (None for unpenalized blocks).
#[derive(Debug, Clone)]
pub struct PredictorState {
    pub intercept: f64,
    pub coefs: Vec<Array1<f64>>,
    pub nu_sq: Vec<Option<f64>>,
}

impl PredictorState {
    /// All-zero coefficients with smoothing variances set to `nu_init`.
    pub fn zeros(spec: &PredictorSpec, nu_init: f64) -> Self {
        Self {
            intercept: 0.0,
            coefs: spec.blocks.iter().map(|b| Array1::zeros(b.n_coef())).collect(),
            nu_sq: spec
                .blocks
                .iter()
                .map(|b| if b.is_penalized() { Some(nu_init) } else { None })
                .collect(),
        }
    }
}

/// Complete parameter state of one chain.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub discrete0: Option<PredictorState>,
    pub discrete1: Option<PredictorState>,
    pub continuous: PredictorState,
    /// Latent mixture weights, one per interior observation.
    pub w: Array1<f64>,
    /// Working-likelihood precision.
    pub delta_sq: f64,
}

impl ModelState {
    pub fn predictor(&self, id: usize) -> Option<&PredictorState> {
        match id {
            0 => self.discrete0.as_ref(),
            1 => self.discrete1.as_ref(),
            2 => Some(&self.continuous),
            _ => None,
        }
    }

    pub fn predictor_mut(&mut self, id: usize) -> Option<&mut PredictorState> {
        match id {
            0 => self.discrete0.as_mut(),
            1 => self.discrete1.as_mut(),
            2 => Some(&mut self.continuous),
            _ => None,
        }
    }
}

/// Evaluate a structured additive predictor at the training data:
/// intercept plus the sum of all block contributions.
pub fn linear_predictor(spec: &PredictorSpec, state: &PredictorState, n: usize) -> Array1<f64> {
    let mut eta = Array1::<f64>::from_elem(n, state.intercept);
    for (block, beta) in spec.blocks.iter().zip(&state.coefs) {
        eta = eta + block.basis.dot(beta);
    }
    eta
}

/// Multinomial-logit boundary probabilities. Either predictor may be
/// absent (one-sided inflation); the corresponding probability is zero.
/// Returns (p0, p1, p_interior), each of length n.
pub fn link_probs(
    eta0: Option<&ArrayView1<f64>>,
    eta1: Option<&ArrayView1<f64>>,
) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>)> {
    let n = eta0
        .map(|e| e.len())
        .or_else(|| eta1.map(|e| e.len()))
        .ok_or_else(|| Error::InvalidArgument {
            name: "eta".into(),
            reason: "at least one boundary predictor is required".into(),
        })?;
    if let (Some(e0), Some(e1)) = (eta0, eta1) {
        if e0.len() != e1.len() {
            return Err(Error::DimensionMismatch {
                context: "boundary predictors".into(),
                expected: e0.len(),
                got: e1.len(),
            });
        }
    }
    let mut p0 = Array1::<f64>::zeros(n);
    let mut p1 = Array1::<f64>::zeros(n);
    let mut pc = Array1::<f64>::zeros(n);
    for i in 0..n {
        let e0 = eta0.map(|e| e[i]);
        let e1 = eta1.map(|e| e[i]);
        for (name, v) in [("eta0", e0), ("eta1", e1)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument {
                        name: name.into(),
                        reason: format!("non-finite predictor value at position {i}"),
                    });
                }
            }
        }
        // Log-sum-exp over the categories present, with the interior at 0.
        let mut terms = vec![0.0];
        terms.extend(e0);
        terms.extend(e1);
        let lse = log_sum_exp(&terms);
        p0[i] = e0.map_or(0.0, |e| (e - lse).exp());
        p1[i] = e1.map_or(0.0, |e| (e - lse).exp());
        pc[i] = (-lse).exp();
    }
    Ok((p0, p1, pc))
}

/// Multinomial log likelihood of the boundary categories. Probabilities
/// that are exactly zero where their indicator fires yield -infinity
/// rather than an error.
pub fn discrete_loglik(
    obs: &ObservationSet,
    p0: &ArrayView1<f64>,
    p1: &ArrayView1<f64>,
    p_interior: &ArrayView1<f64>,
) -> f64 {
    let mut total = 0.0;
    for i in 0..obs.n() {
        let p = if obs.ind0[i] == 1.0 {
            p0[i]
        } else if obs.ind1[i] == 1.0 {
            p1[i]
        } else {
            p_interior[i]
        };
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += p.ln();
    }
    total
}

/// Log density of the asymmetric-Laplace working likelihood with check
/// loss rho_tau, precision delta_sq, at location eta.
pub fn ald_logpdf(y: f64, eta: f64, delta_sq: f64, tau: f64) -> f64 {
    let v = y - eta;
    let check = if v >= 0.0 { tau * v } else { -(1.0 - tau) * v };
    (tau * (1.0 - tau) * delta_sq).ln() - delta_sq * check
}

/// Log of the conditionally Gaussian (augmented) continuous likelihood:
/// for each interior observation, a normal term in the logit response with
/// mean eta + xi w and variance w sigma_sq / delta_sq, plus the
/// exponential density of the latent weight.
pub fn augmented_continuous_loglik(
    obs: &ObservationSet,
    eta2: &ArrayView1<f64>,
    w: &ArrayView1<f64>,
    delta_sq: f64,
    xi: f64,
    sigma_sq: f64,
) -> f64 {
    let n_c = obs.n_interior();
    assert_eq!(w.len(), n_c, "one latent weight per interior observation");
    let mut total = 0.0;
    for (j, &row) in obs.interior_idx.iter().enumerate() {
        let var = w[j] * sigma_sq / delta_sq;
        let r = obs.y_logit[j] - eta2[row] - xi * w[j];
        total += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - r * r / (2.0 * var);
        total += delta_sq.ln() - delta_sq * w[j];
    }
    total
}

/// Improper rank-deficient Gaussian log prior for one coefficient block:
/// -(rank/2) log nu_sq - beta' K beta / (2 nu_sq). Zero for unpenalized
/// blocks.
pub fn log_prior_block(
    beta: &ArrayView1<f64>,
    penalty: &ndarray::ArrayView2<f64>,
    rank: usize,
    nu_sq: Option<f64>,
) -> f64 {
    if rank == 0 {
        return 0.0;
    }
    let nu_sq = nu_sq.expect("penalized block must carry a smoothing variance");
    let q = crate::linalg::quad_form(penalty, beta);
    -(rank as f64 / 2.0) * nu_sq.ln() - q / (2.0 * nu_sq)
}

/// Inverse-gamma log density with shape `a` and scale `b`.
pub fn inv_gamma_logpdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    a * b.ln() - ln_gamma(a) - (a + 1.0) * x.ln() - b / x
}

/// Gamma log density with shape and rate.
pub fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Joint log posterior of the full augmented model: both likelihood parts,
/// all block priors, smoothing-variance hyperpriors, and the precision
/// prior. Normalizing constants of the priors are included.
pub fn log_posterior(spec: &ModelSpec, obs: &ObservationSet, state: &ModelState) -> f64 {
    let n = obs.n();
    let mut total = 0.0;

    let eta0 = spec
        .discrete0
        .as_ref()
        .map(|p| linear_predictor(p, state.discrete0.as_ref().unwrap(), n));
    let eta1 = spec
        .discrete1
        .as_ref()
        .map(|p| linear_predictor(p, state.discrete1.as_ref().unwrap(), n));
    if eta0.is_some() || eta1.is_some() {
        let (p0, p1, pc) =
            link_probs(eta0.as_ref().map(|e| e.view()).as_ref(), eta1.as_ref().map(|e| e.view()).as_ref())
                .expect("validated predictors");
        total += discrete_loglik(obs, &p0.view(), &p1.view(), &pc.view());
    }

    let eta2 = linear_predictor(&spec.continuous, &state.continuous, n);
    total += augmented_continuous_loglik(
        obs,
        &eta2.view(),
        &state.w.view(),
        state.delta_sq,
        spec.xi(),
        spec.sigma_sq(),
    );

    for id in 0..3 {
        let (Some(pred), Some(pstate)) = (spec.predictor(id), state.predictor(id)) else {
            continue;
        };
        for ((block, beta), nu_sq) in pred.blocks.iter().zip(&pstate.coefs).zip(&pstate.nu_sq) {
            total += log_prior_block(&beta.view(), &block.penalty.view(), block.penalty_rank, *nu_sq);
            if let Some(v) = nu_sq {
                let a = block.hyper_a.expect("penalized block carries hyperparameters");
                let b = block.hyper_b.expect("penalized block carries hyperparameters");
                total += inv_gamma_logpdf(*v, a, b);
            }
        }
    }

    total += gamma_logpdf(state.delta_sq, spec.delta_a, spec.delta_b);
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::logistic;
    use ndarray::{array, Array2};

    fn obs_zero_and_one(values: &[f64]) -> ObservationSet {
        let y = Array1::from_vec(values.to_vec());
        let mut warnings = Vec::new();
        partition_observations(&y.view(), InflationKind::ZeroAndOne, &mut warnings).unwrap()
    }

    #[test]
    fn partition_splits_boundaries_and_interior() {
        let obs = obs_zero_and_one(&[0.0, 0.25, 1.0, 0.5, 0.0, 0.75]);
        assert_eq!(obs.n(), 6);
        assert_eq!(obs.n_zero(), 2);
        assert_eq!(obs.n_one(), 1);
        assert_eq!(obs.n_interior(), 3);
        assert_eq!(obs.interior_idx(), &[1, 3, 5]);
        assert!((obs.y_logit()[0] - logit(0.25)).abs() < 1e-15);
        assert!((obs.y_logit()[1]).abs() < 1e-15);
        // Indicators partition every row.
        for i in 0..6 {
            let s = obs.ind0()[i] + obs.ind1()[i] + obs.ind_interior()[i];
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn partition_rejects_disallowed_boundaries() {
        let mut warnings = Vec::new();
        let y = array![0.2, 1.0, 0.4];
        let err =
            partition_observations(&y.view(), InflationKind::ZeroOnly, &mut warnings).unwrap_err();
        match err {
            Error::InvalidData { row, .. } => assert_eq!(row, 1),
            other => panic!("expected InvalidData, got {other:?}"),
        }
        let y = array![0.2, 0.0];
        assert!(partition_observations(&y.view(), InflationKind::OneOnly, &mut warnings).is_err());
        let y = array![0.2, 1.5];
        assert!(
            partition_observations(&y.view(), InflationKind::ZeroAndOne, &mut warnings).is_err()
        );
        let y = array![f64::NAN];
        assert!(
            partition_observations(&y.view(), InflationKind::ZeroAndOne, &mut warnings).is_err()
        );
    }

    #[test]
    fn partition_audits_extreme_logits() {
        let mut warnings = Vec::new();
        let y = array![0.5, 1e-15, 0.25];
        partition_observations(&y.view(), InflationKind::ZeroAndOne, &mut warnings).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("[1]"), "warning should name row 1: {}", warnings[0]);
    }

    #[test]
    fn link_probs_match_direct_formula() {
        let eta0 = array![0.3, -1.0];
        let eta1 = array![-0.5, 2.0];
        let (p0, p1, pc) = link_probs(Some(&eta0.view()), Some(&eta1.view())).unwrap();
        for i in 0..2 {
            let denom = 1.0 + eta0[i].exp() + eta1[i].exp();
            assert!((p0[i] - eta0[i].exp() / denom).abs() < 1e-14);
            assert!((p1[i] - eta1[i].exp() / denom).abs() < 1e-14);
            assert!((pc[i] - 1.0 / denom).abs() < 1e-14);
            assert!((p0[i] + p1[i] + pc[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn link_probs_one_sided_reduce_to_logistic() {
        let eta = array![0.7, -3.0, 0.0];
        let (p0, p1, pc) = link_probs(Some(&eta.view()), None).unwrap();
        for i in 0..3 {
            assert!((p0[i] - logistic(eta[i])).abs() < 1e-14);
            assert_eq!(p1[i], 0.0);
            assert!((pc[i] - logistic(-eta[i])).abs() < 1e-14);
        }
        let (q0, q1, _) = link_probs(None, Some(&eta.view())).unwrap();
        assert_eq!(q0[0], 0.0);
        assert!((q1[0] - logistic(eta[0])).abs() < 1e-14);
        assert!(link_probs(None, None).is_err());
    }

    #[test]
    fn link_probs_stable_at_large_predictors() {
        // At eta = 50 the naive ratio formula still evaluates in f64 and
        // serves as a reference for the stabilized computation.
        let eta0 = array![50.0];
        let eta1 = array![49.0];
        let (p0, p1, pc) = link_probs(Some(&eta0.view()), Some(&eta1.view())).unwrap();
        let denom = 1.0 + 50.0_f64.exp() + 49.0_f64.exp();
        assert!((p0[0] - 50.0_f64.exp() / denom).abs() < 1e-12);
        assert!((p0[0] + p1[0] + pc[0] - 1.0).abs() < 1e-12);
        let eta_big = array![800.0];
        let (p0, _, pc) = link_probs(Some(&eta_big.view()), None).unwrap();
        assert!(p0[0] <= 1.0 && (p0[0] - 1.0).abs() < 1e-12);
        assert!(pc[0] >= 0.0 && pc[0] < 1e-300);
        assert!(link_probs(Some(&array![f64::INFINITY].view()), None).is_err());
    }

    #[test]
    fn discrete_loglik_matches_products_and_handles_zero_mass() {
        let obs = obs_zero_and_one(&[0.0, 0.5, 1.0]);
        let p0 = array![0.2, 0.1, 0.3];
        let p1 = array![0.3, 0.2, 0.5];
        let pc = array![0.5, 0.7, 0.2];
        let ll = discrete_loglik(&obs, &p0.view(), &p1.view(), &pc.view());
        let want = 0.2_f64.ln() + 0.7_f64.ln() + 0.5_f64.ln();
        assert!((ll - want).abs() < 1e-14);
        let p0_zero = array![0.0, 0.1, 0.3];
        let ll = discrete_loglik(&obs, &p0_zero.view(), &p1.view(), &pc.view());
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn ald_logpdf_known_values_and_asymmetry() {
        // At tau = 0.5, delta_sq = 1: log(1/4) at the mode.
        assert!((ald_logpdf(0.0, 0.0, 1.0, 0.5) - 0.25_f64.ln()).abs() < 1e-14);
        // Check-loss slopes differ by tau on the two sides.
        let tau = 0.3;
        let up = ald_logpdf(1.0, 0.0, 2.0, tau);
        let down = ald_logpdf(-1.0, 0.0, 2.0, tau);
        let base = (tau * (1.0 - tau) * 2.0).ln();
        assert!((up - (base - 2.0 * tau)).abs() < 1e-14);
        assert!((down - (base - 2.0 * (1.0 - tau))).abs() < 1e-14);
    }

    #[test]
    fn model_spec_constants_at_median() {
        let spec = ModelSpec::new(
            InflationKind::ZeroAndOne,
            0.5,
            Some(PredictorSpec::default()),
            Some(PredictorSpec::default()),
            PredictorSpec::default(),
        );
        assert_eq!(spec.xi(), 0.0);
        assert_eq!(spec.sigma_sq(), 8.0);
        assert_eq!((spec.delta_a, spec.delta_b), DELTA_PRIOR_DEFAULT);
        // Asymmetric case.
        let spec = ModelSpec { tau: 0.25, ..spec };
        assert!((spec.xi() - (0.5 / 0.1875)).abs() < 1e-12);
        assert!((spec.sigma_sq() - (2.0 / 0.1875)).abs() < 1e-12);
    }

    #[test]
    fn spec_validation_catches_mismatches() {
        let spec = ModelSpec::new(
            InflationKind::ZeroOnly,
            0.5,
            Some(PredictorSpec::default()),
            None,
            PredictorSpec::default(),
        );
        spec.validate(10).unwrap();
        let bad = ModelSpec { tau: 1.0, ..spec.clone() };
        assert!(bad.validate(10).is_err());
        let bad = ModelSpec { discrete0: None, ..spec.clone() };
        assert!(bad.validate(10).is_err());
        let bad = ModelSpec {
            discrete1: Some(PredictorSpec::default()),
            ..spec.clone()
        };
        assert!(bad.validate(10).is_err());
    }

    #[test]
    fn augmented_loglik_empty_interior_is_zero() {
        let mut warnings = Vec::new();
        let y = array![0.0, 1.0, 0.0];
        let obs =
            partition_observations(&y.view(), InflationKind::ZeroAndOne, &mut warnings).unwrap();
        let eta2 = Array1::zeros(3);
        let w = Array1::zeros(0);
        let ll = augmented_continuous_loglik(&obs, &eta2.view(), &w.view(), 1.0, 0.0, 8.0);
        assert_eq!(ll, 0.0);
    }

    #[test]
    fn augmented_loglik_matches_hand_computation() {
        let obs = obs_zero_and_one(&[0.5, 0.0]);
        let eta2 = array![0.2, 0.0];
        let w = array![1.5];
        let (delta_sq, xi, sigma_sq) = (2.0, 1.0, 8.0);
        let var = 1.5 * 8.0 / 2.0;
        let r = 0.0 - 0.2 - 1.0 * 1.5;
        let want = -0.5 * (2.0 * std::f64::consts::PI * var).ln() - r * r / (2.0 * var)
            + 2.0_f64.ln()
            - 2.0 * 1.5;
        let got = augmented_continuous_loglik(&obs, &eta2.view(), &w.view(), delta_sq, xi, sigma_sq);
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn prior_block_values() {
        let k = Array2::eye(3);
        let beta = array![1.0, 2.0, -1.0];
        let lp = log_prior_block(&beta.view(), &k.view(), 3, Some(2.0));
        let want = -1.5 * 2.0_f64.ln() - 6.0 / 4.0;
        assert!((lp - want).abs() < 1e-14);
        // Null-space directions contribute nothing to the quadratic form.
        let k2 = crate::design::difference_penalty(4, 2).unwrap();
        let lin = array![0.0, 1.0, 2.0, 3.0];
        let lp_lin = log_prior_block(&lin.view(), &k2.view(), 2, Some(3.0));
        assert!((lp_lin - (-(1.0) * 3.0_f64.ln())).abs() < 1e-12);
        // Unpenalized blocks are flat.
        let zero = Array2::zeros((2, 2));
        assert_eq!(log_prior_block(&array![5.0, -5.0].view(), &zero.view(), 0, None), 0.0);
    }

    #[test]
    fn log_posterior_is_additive_in_its_terms() {
        // Changing one component changes the total by exactly that term.
        let obs = obs_zero_and_one(&[0.0, 0.3, 0.8, 1.0, 0.6]);
        let x = array![0.1, 0.4, 0.5, 0.9, 0.2];
        let opts = crate::design::PsplineOptions { n_basis: 5, ..Default::default() };
        let block = crate::design::build_pspline_term("f", &x.view(), &opts).unwrap();
        let spec = ModelSpec::new(
            InflationKind::ZeroAndOne,
            0.5,
            Some(PredictorSpec::default()),
            Some(PredictorSpec::default()),
            PredictorSpec::new(vec![block.clone()]),
        );
        let mut state = ModelState {
            discrete0: Some(PredictorState::zeros(&PredictorSpec::default(), 10.0)),
            discrete1: Some(PredictorState::zeros(&PredictorSpec::default(), 10.0)),
            continuous: PredictorState::zeros(&spec.continuous, 2.0),
            w: Array1::from_elem(obs.n_interior(), 1.0),
            delta_sq: 1.0,
        };
        state.continuous.coefs[0] = array![0.1, -0.2, 0.3, 0.05];
        let base = log_posterior(&spec, &obs, &state);

        // Shift delta_sq: likelihood + precision prior terms change.
        let mut state2 = state.clone();
        state2.delta_sq = 2.0;
        let eta2 = linear_predictor(&spec.continuous, &state.continuous, obs.n());
        let lik_diff = augmented_continuous_loglik(&obs, &eta2.view(), &state.w.view(), 2.0, 0.0, 8.0)
            - augmented_continuous_loglik(&obs, &eta2.view(), &state.w.view(), 1.0, 0.0, 8.0);
        let prior_diff = gamma_logpdf(2.0, spec.delta_a, spec.delta_b)
            - gamma_logpdf(1.0, spec.delta_a, spec.delta_b);
        let got = log_posterior(&spec, &obs, &state2) - base;
        assert!((got - (lik_diff + prior_diff)).abs() < 1e-10);

        // Shift a smoothing variance: only prior + hyperprior terms change.
        let mut state3 = state.clone();
        state3.continuous.nu_sq[0] = Some(4.0);
        let beta = &state.continuous.coefs[0];
        let block_ref = &spec.continuous.blocks[0];
        let want = log_prior_block(&beta.view(), &block_ref.penalty.view(), block_ref.penalty_rank, Some(4.0))
            - log_prior_block(&beta.view(), &block_ref.penalty.view(), block_ref.penalty_rank, Some(2.0))
            + inv_gamma_logpdf(4.0, block_ref.hyper_a.unwrap(), block_ref.hyper_b.unwrap())
            - inv_gamma_logpdf(2.0, block_ref.hyper_a.unwrap(), block_ref.hyper_b.unwrap());
        let got = log_posterior(&spec, &obs, &state3) - base;
        assert!((got - want).abs() < 1e-10);

        // Shift the zero-part intercept: only the discrete likelihood moves.
        let mut state4 = state.clone();
        state4.discrete0.as_mut().unwrap().intercept = 0.7;
        let e0_old = Array1::zeros(obs.n());
        let e0_new = Array1::from_elem(obs.n(), 0.7);
        let e1 = Array1::zeros(obs.n());
        let (p0o, p1o, pco) = link_probs(Some(&e0_old.view()), Some(&e1.view())).unwrap();
        let (p0n, p1n, pcn) = link_probs(Some(&e0_new.view()), Some(&e1.view())).unwrap();
        let want = discrete_loglik(&obs, &p0n.view(), &p1n.view(), &pcn.view())
            - discrete_loglik(&obs, &p0o.view(), &p1o.view(), &pco.view());
        let got = log_posterior(&spec, &obs, &state4) - base;
        assert!((got - want).abs() < 1e-10);
    }
}
