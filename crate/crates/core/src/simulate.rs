//! Synthetic-data scenarios for the two-part quantile model, closed-form
//! truth functions, and a replicate study driver that fits the canonical
//! two-smooth model and scores quantile and probability recovery.

use crate::design::{build_pspline_term, BlockInput, PsplineOptions};
use crate::diagnostics::{
    boundary_prob_draws, ess_bulk, per_chain_column, pointwise_coverage, quantile_curve_draws,
    rmse_curve, split_rhat,
};
use crate::engine::{run_chains, ChainDraws, RunConfig, SamplerParts};
use crate::error::{Error, Result};
use crate::model::{partition_observations, InflationKind, ModelSpec, PredictorSpec};
use crate::special::{log_sum_exp, logistic};
use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp, StandardNormal};

/// Smallest precision the heteroscedastic scenario allows; the response
/// transform degenerates at zero.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Keep generated interior responses strictly inside (0,1) so floating
/// point rounding cannot turn them into boundary points.
const INTERIOR_EPS: f64 = 1e-15;

/// First shape function: a damped sine wave.
pub fn m1(x: f64) -> f64 {
    (3.0 * std::f64::consts::PI * x).sin() * (-x).exp()
}

/// Second shape function: a cubic.
pub fn m2(x: f64) -> f64 {
    x * x * x
}

/// Third shape function: a shifted Gaussian bump.
pub fn m3(x: f64) -> f64 {
    0.5 * (-x * x).exp() - 0.2
}

/// Fourth shape function: a constant.
pub fn m4(_x: f64) -> f64 {
    1.0
}

/// Linear predictors of the two boundary categories at inflation level `k`.
pub fn scenario_etas(x1: f64, x2: f64, k: f64) -> (f64, f64) {
    (
        0.3 * (m1(x1) + m2(x2)) - k,
        0.3 * (m3(x1) + m4(x2)) - k,
    )
}

/// Boundary and interior probabilities `(p0, p1, p_interior)` at
/// inflation level `k`.
pub fn scenario_probs(x1: f64, x2: f64, k: f64) -> (f64, f64, f64) {
    let (e0, e1) = scenario_etas(x1, x2, k);
    let denom = log_sum_exp(&[0.0, e0, e1]);
    ((e0 - denom).exp(), (e1 - denom).exp(), (-denom).exp())
}

/// One draw from the asymmetric Laplace distribution with location `eta`,
/// precision `delta_sq`, and asymmetry `tau`, via its exponential-Gaussian
/// mixture representation.
pub fn sample_ald<R: Rng>(eta: f64, delta_sq: f64, tau: f64, rng: &mut R) -> f64 {
    let xi = (1.0 - 2.0 * tau) / (tau * (1.0 - tau));
    let sigma_sq = 2.0 / (tau * (1.0 - tau));
    let w = Exp::new(delta_sq).expect("positive precision").sample(rng);
    let z: f64 = rng.sample(StandardNormal);
    eta + xi * w + (sigma_sq * w / delta_sq).sqrt() * z
}

/// CDF of the asymmetric Laplace distribution centered at zero.
pub fn ald_cdf(v: f64, delta_sq: f64, tau: f64) -> f64 {
    if v <= 0.0 {
        tau * (delta_sq * (1.0 - tau) * v).exp()
    } else {
        1.0 - (1.0 - tau) * (-delta_sq * tau * v).exp()
    }
}

/// Student-t quantile via the inverse regularized incomplete beta
/// function; exact at the median and antisymmetric around it.
pub fn student_t_quantile(df: f64, tau: f64) -> f64 {
    assert!(df > 0.0 && tau > 0.0 && tau < 1.0, "invalid Student-t quantile request");
    if tau == 0.5 {
        return 0.0;
    }
    if tau < 0.5 {
        return -student_t_quantile(df, 1.0 - tau);
    }
    // P(T > t) = I_x(df/2, 1/2)/2 with x = df/(df + t^2).
    let x = crate::special::inv_reg_inc_beta(df / 2.0, 0.5, 2.0 * (1.0 - tau));
    (df * (1.0 - x) / x).sqrt()
}

/// Closed-form quantile of the logit-t response family with median `mu`,
/// precision `sigma`, and `rho_df` degrees of freedom.
pub fn gjs_t_quantile(mu: f64, sigma: f64, rho_df: f64, tau: f64) -> f64 {
    assert!(mu > 0.0 && mu < 1.0, "median must lie inside (0,1)");
    assert!(sigma > 0.0, "precision must be positive");
    let t = student_t_quantile(rho_df, tau);
    let e = (sigma * t).exp();
    if e.is_infinite() {
        return 1.0 - INTERIOR_EPS;
    }
    mu * e / (1.0 - mu * (1.0 - e))
}

/// One draw from the logit-t response family: the quantile transform
/// applied to a Student-t variate.
pub fn sample_gjs_t<R: Rng>(mu: f64, sigma: f64, rho_df: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let chi: f64 = ChiSquared::new(rho_df).expect("positive degrees of freedom").sample(rng);
    let t = z / (chi / rho_df).sqrt();
    let e = (sigma * t).exp();
    let y = if e.is_infinite() { 1.0 } else { mu * e / (1.0 - mu * (1.0 - e)) };
    y.clamp(INTERIOR_EPS, 1.0 - INTERIOR_EPS)
}

/// Splittable seed derivation: mixes a base seed with a stream index so
/// related runs get statistically independent generators.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the combined words.
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which synthetic response family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Correctly specified: interior responses are inverse-logit
    /// asymmetric-Laplace draws (precision 9) around the additive truth.
    AldLogit,
    /// Misspecified: interior responses come from the logit-t family with
    /// covariate-dependent precision.
    HeteroscedasticLogitT,
}

/// Settings for one synthetic dataset.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n: usize,
    /// Inflation level: larger values shrink the boundary mass.
    pub k: f64,
    /// Asymmetry of the generating distribution (first scenario only).
    pub tau: f64,
    /// Seed of the covariate stream, shared across replicates.
    pub covariate_seed: u64,
    /// Seed of the response stream, varied per replicate.
    pub replicate_seed: u64,
}

/// Precision of the correctly specified scenario's generator.
pub const ALD_SCENARIO_DELTA_SQ: f64 = 9.0;

/// Degrees of freedom of the misspecified scenario's generator.
pub const GJS_T_DF: f64 = 4.0;

/// A generated dataset plus the truth evaluated at its own covariates.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub x1: Array1<f64>,
    pub x2: Array1<f64>,
    pub y: Array1<f64>,
    pub true_p0: Array1<f64>,
    pub true_p1: Array1<f64>,
    /// Number of precision values lifted to the floor (second scenario).
    pub sigma_clamps: usize,
}

/// Uniform covariates from a dedicated stream, so every replicate sees
/// the same design points.
pub fn draw_covariates(covariate_seed: u64, n: usize) -> (Array1<f64>, Array1<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(covariate_seed, 0));
    let x1 = Array1::from_shape_fn(n, |_| rng.random::<f64>());
    let x2 = Array1::from_shape_fn(n, |_| rng.random::<f64>());
    (x1, x2)
}

/// Generate one dataset. Covariates depend only on `covariate_seed`;
/// responses only on `replicate_seed` (given the covariates).
pub fn generate(cfg: &ScenarioConfig) -> Result<SimulatedData> {
    if cfg.n == 0 {
        return Err(Error::InvalidArgument { name: "n".into(), reason: "must be positive".into() });
    }
    if cfg.k <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "k".into(),
            reason: "inflation level must be positive".into(),
        });
    }
    if !(cfg.tau > 0.0 && cfg.tau < 1.0) {
        return Err(Error::InvalidArgument {
            name: "tau".into(),
            reason: "must lie strictly between 0 and 1".into(),
        });
    }
    let (x1, x2) = draw_covariates(cfg.covariate_seed, cfg.n);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.replicate_seed, 1));
    let mut y = Array1::<f64>::zeros(cfg.n);
    let mut p0v = Array1::<f64>::zeros(cfg.n);
    let mut p1v = Array1::<f64>::zeros(cfg.n);
    let mut sigma_clamps = 0usize;
    for i in 0..cfg.n {
        let (p0, p1, _) = scenario_probs(x1[i], x2[i], cfg.k);
        p0v[i] = p0;
        p1v[i] = p1;
        let u: f64 = rng.random();
        y[i] = if u < p0 {
            0.0
        } else if u < p0 + p1 {
            1.0
        } else {
            match cfg.kind {
                ScenarioKind::AldLogit => {
                    let eta2 = m1(x1[i]) + m2(x2[i]);
                    let v = sample_ald(eta2, ALD_SCENARIO_DELTA_SQ, cfg.tau, &mut rng);
                    logistic(v).clamp(INTERIOR_EPS, 1.0 - INTERIOR_EPS)
                }
                ScenarioKind::HeteroscedasticLogitT => {
                    let mu = logistic(m1(x1[i]) + m2(x2[i]));
                    let sigma = if x2[i] < SIGMA_FLOOR {
                        sigma_clamps += 1;
                        SIGMA_FLOOR
                    } else {
                        x2[i]
                    };
                    sample_gjs_t(mu, sigma, GJS_T_DF, &mut rng)
                }
            }
        };
    }
    Ok(SimulatedData { x1, x2, y, true_p0: p0v, true_p1: p1v, sigma_clamps })
}

/// True conditional quantile curve of a scenario on the response scale.
/// For the correctly specified scenario this is exact at the generating
/// asymmetry level.
pub fn true_quantile(kind: ScenarioKind, x1: f64, x2: f64, tau: f64) -> f64 {
    match kind {
        ScenarioKind::AldLogit => logistic(m1(x1) + m2(x2)),
        ScenarioKind::HeteroscedasticLogitT => {
            let mu = logistic(m1(x1) + m2(x2));
            gjs_t_quantile(mu, x2.max(SIGMA_FLOOR), GJS_T_DF, tau)
        }
    }
}

/// The canonical study model: both boundary predictors and the
/// continuous predictor each carry smooth effects of `x1` and `x2`.
pub fn canonical_spec(
    x1: &ArrayView1<f64>,
    x2: &ArrayView1<f64>,
    tau: f64,
    n_basis: usize,
) -> Result<ModelSpec> {
    let opts = PsplineOptions { n_basis, ..Default::default() };
    let pred = |x1: &ArrayView1<f64>, x2: &ArrayView1<f64>| -> Result<PredictorSpec> {
        Ok(PredictorSpec::new(vec![
            build_pspline_term("f(x1)", x1, &opts)?,
            build_pspline_term("f(x2)", x2, &opts)?,
        ]))
    };
    Ok(ModelSpec::new(
        InflationKind::ZeroAndOne,
        tau,
        Some(pred(x1, x2)?),
        Some(pred(x1, x2)?),
        pred(x1, x2)?,
    ))
}

/// Prediction inputs matching [`canonical_spec`]'s block order.
pub fn canonical_inputs(x1: &Array1<f64>, x2: &Array1<f64>) -> Vec<BlockInput> {
    vec![BlockInput::Continuous(x1.clone()), BlockInput::Continuous(x2.clone())]
}

/// Settings of a replicate study.
#[derive(Debug, Clone)]
pub struct StudySettings {
    pub kind: ScenarioKind,
    pub n: usize,
    pub k: f64,
    /// Quantile levels to fit. The correctly specified scenario generates
    /// its data at the fitted level, so it admits a single level per
    /// study; the misspecified scenario shares one dataset across levels.
    pub taus: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub covariate_seed: u64,
    pub n_test: usize,
    pub n_basis: usize,
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub thin: usize,
    /// Fit the boundary model once per replicate and reuse it across
    /// quantile levels (misspecified scenario only).
    pub share_discrete: bool,
    pub max_workers: Option<usize>,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::AldLogit,
            n: 500,
            k: 1.0,
            taus: vec![0.5],
            replicates: 20,
            seed: 0,
            covariate_seed: 7,
            n_test: 100,
            n_basis: 20,
            chains: 4,
            warmup: 500,
            // The latent-weight augmentation leaves the continuous intercept
            // with roughly 5% sampling efficiency, so clearing a bulk ESS of
            // 400 with margin needs this many stored draws per chain.
            draws: 3000,
            thin: 1,
            share_discrete: false,
            max_workers: None,
        }
    }
}

/// Scores of one fitted replicate at one quantile level.
#[derive(Debug, Clone)]
pub struct ReplicateMetrics {
    pub replicate: usize,
    pub tau: f64,
    /// Per-draw quantile-curve RMSE averaged over draws.
    pub rmse_quantile: f64,
    pub rmse_p0: f64,
    pub rmse_p1: f64,
    /// Fraction of test points whose 95% interval covers the truth.
    pub coverage_quantile: f64,
    pub coverage_p0: f64,
    pub coverage_p1: f64,
    /// Split-chain scale reduction of the three intercepts and precision.
    pub core_rhat: Vec<(String, f64)>,
    /// Bulk effective sample size of the same parameters.
    pub core_ess: Vec<(String, f64)>,
}

/// Aggregated study output.
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub metrics: Vec<ReplicateMetrics>,
    pub test_x1: Array1<f64>,
    pub test_x2: Array1<f64>,
}

const CORE_PARAMS: [&str; 4] =
    ["pred0.intercept", "pred1.intercept", "pred2.intercept", "delta_sq"];

fn core_diagnostics(chains: &[ChainDraws]) -> Result<(Vec<(String, f64)>, Vec<(String, f64)>)> {
    let mut rhats = Vec::new();
    let mut esses = Vec::new();
    for name in CORE_PARAMS {
        let cols = per_chain_column(chains, name)?;
        let views: Vec<ArrayView1<f64>> = cols.iter().map(|c| c.view()).collect();
        rhats.push((name.to_string(), split_rhat(&views)));
        esses.push((name.to_string(), ess_bulk(&views)));
    }
    Ok((rhats, esses))
}

fn fit_dataset(
    data: &SimulatedData,
    tau: f64,
    parts: SamplerParts,
    base_seed: u64,
    settings: &StudySettings,
) -> Result<(ModelSpec, Vec<ChainDraws>)> {
    let spec = canonical_spec(&data.x1.view(), &data.x2.view(), tau, settings.n_basis)?;
    let mut warnings = Vec::new();
    let obs = partition_observations(&data.y.view(), spec.inflation, &mut warnings)?;
    spec.validate(obs.n())?;
    let cfg = RunConfig {
        n_chains: settings.chains,
        warmup: settings.warmup,
        draws: settings.draws,
        thin: settings.thin,
        base_seed,
        store_latent_weights: false,
        parts,
        max_workers: settings.max_workers,
    };
    let chains = run_chains(&spec, &obs, &cfg)?;
    Ok((spec, chains))
}

/// Run the replicate study: regenerate responses over fixed covariates,
/// fit the canonical model at each requested quantile level, and score
/// quantile and boundary-probability recovery on a fixed test grid.
pub fn run_replicate_study(settings: &StudySettings) -> Result<StudyResult> {
    if settings.replicates == 0 || settings.taus.is_empty() {
        return Err(Error::InvalidArgument {
            name: "study".into(),
            reason: "needs at least one replicate and one quantile level".into(),
        });
    }
    if settings.kind == ScenarioKind::AldLogit && settings.taus.len() > 1 {
        return Err(Error::InvalidArgument {
            name: "taus".into(),
            reason: "the correctly specified scenario generates data at one level; run one study per level"
                .into(),
        });
    }
    if settings.share_discrete && settings.kind == ScenarioKind::AldLogit {
        return Err(Error::InvalidArgument {
            name: "share_discrete".into(),
            reason: "sharing the boundary fit requires one dataset across levels".into(),
        });
    }

    // Fixed fresh test points, drawn once from their own stream.
    let mut test_rng = ChaCha8Rng::seed_from_u64(derive_seed(settings.covariate_seed, 1));
    let test_x1 = Array1::from_shape_fn(settings.n_test, |_| test_rng.random::<f64>());
    let test_x2 = Array1::from_shape_fn(settings.n_test, |_| test_rng.random::<f64>());
    let truth_p0 = Array1::from_shape_fn(settings.n_test, |i| {
        scenario_probs(test_x1[i], test_x2[i], settings.k).0
    });
    let truth_p1 = Array1::from_shape_fn(settings.n_test, |i| {
        scenario_probs(test_x1[i], test_x2[i], settings.k).1
    });

    let mut metrics = Vec::new();
    for r in 0..settings.replicates {
        let data_cfg = ScenarioConfig {
            kind: settings.kind,
            n: settings.n,
            k: settings.k,
            tau: settings.taus[0],
            covariate_seed: settings.covariate_seed,
            replicate_seed: derive_seed(settings.seed, 100 + r as u64),
        };
        let data = generate(&data_cfg)?;

        // Optional shared boundary-part fit (one dataset, several levels).
        let shared = if settings.share_discrete {
            let (spec, chains) = fit_dataset(
                &data,
                settings.taus[0],
                SamplerParts { discrete: true, continuous: false },
                derive_seed(settings.seed, 20_000 + r as u64),
                settings,
            )?;
            Some((spec, chains))
        } else {
            None
        };

        for (ti, &tau) in settings.taus.iter().enumerate() {
            let parts = if shared.is_some() {
                SamplerParts { discrete: false, continuous: true }
            } else {
                SamplerParts::default()
            };
            let (spec, chains) = fit_dataset(
                &data,
                tau,
                parts,
                derive_seed(settings.seed, 10_000 + (r * 8 + ti) as u64),
                settings,
            )?;

            let mut warnings = Vec::new();
            let inputs = canonical_inputs(&test_x1, &test_x2);
            let q_draws =
                quantile_curve_draws(&spec, &chains, &inputs, settings.n_test, &mut warnings)?;
            let truth_q = Array1::from_shape_fn(settings.n_test, |i| {
                true_quantile(settings.kind, test_x1[i], test_x2[i], tau)
            });

            let (prob_spec, prob_chains) = match &shared {
                Some((s, c)) => (s, c),
                None => (&spec, &chains),
            };
            let (p0_draws, p1_draws) = boundary_prob_draws(
                prob_spec,
                prob_chains,
                Some(&canonical_inputs(&test_x1, &test_x2)),
                Some(&canonical_inputs(&test_x1, &test_x2)),
                settings.n_test,
                &mut warnings,
            )?;

            // Convergence of the core parameters: boundary intercepts from
            // whichever run updated them, the rest from the level fit.
            let (core_rhat, core_ess) = match &shared {
                Some((_, shared_chains)) => {
                    let (mut rh, mut es) = core_diagnostics(shared_chains)?;
                    let (rh2, es2) = core_diagnostics(&chains)?;
                    for i in 2..4 {
                        rh[i] = rh2[i].clone();
                        es[i] = es2[i].clone();
                    }
                    (rh, es)
                }
                None => core_diagnostics(&chains)?,
            };

            metrics.push(ReplicateMetrics {
                replicate: r,
                tau,
                rmse_quantile: rmse_curve(&truth_q.view(), &q_draws.view()).mean().unwrap(),
                rmse_p0: rmse_curve(&truth_p0.view(), &p0_draws.view()).mean().unwrap(),
                rmse_p1: rmse_curve(&truth_p1.view(), &p1_draws.view()).mean().unwrap(),
                coverage_quantile: pointwise_coverage(&q_draws.view(), &truth_q.view(), 0.95),
                coverage_p0: pointwise_coverage(&p0_draws.view(), &truth_p0.view(), 0.95),
                coverage_p1: pointwise_coverage(&p1_draws.view(), &truth_p1.view(), 0.95),
                core_rhat,
                core_ess,
            });
        }
    }
    Ok(StudyResult { metrics, test_x1, test_x2 })
}
