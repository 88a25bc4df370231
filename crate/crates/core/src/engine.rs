//! Chain orchestration: initialization, warmup with step-size adaptation,
//! the fixed per-iteration update schedule, draw storage, and deterministic
//! multi-chain execution.

use crate::diagnostics::quantile_type7;
use crate::error::{Error, Result};
use crate::model::{linear_predictor, InflationKind, ModelSpec, ModelState, ObservationSet, PredictorState};
use crate::samplers::{
    block_label, gibbs_delta_sq, gibbs_latent_weights, gibbs_smoothing_variance, iwls_mh_update,
    BlockId, BlockRef, DualAveraging, MhOutcome, EPS_INIT, MH_TARGET_ACCEPT,
};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Which parameter groups a run actually updates. Disabled groups stay at
/// their initial values; this supports reusing one discrete-part fit
/// across several quantile levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerParts {
    pub discrete: bool,
    pub continuous: bool,
}

impl Default for SamplerParts {
    fn default() -> Self {
        Self { discrete: true, continuous: true }
    }
}

/// Sampling run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub thin: usize,
    pub base_seed: u64,
    pub store_latent_weights: bool,
    pub parts: SamplerParts,
    /// Cap on worker threads; `None` uses the available parallelism.
    pub max_workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_chains: 4,
            warmup: 1500,
            draws: 5000,
            thin: 1,
            base_seed: 0,
            store_latent_weights: false,
            parts: SamplerParts::default(),
            max_workers: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("chains", self.n_chains), ("draws", self.draws), ("thin", self.thin)] {
            if v == 0 {
                return Err(Error::InvalidArgument {
                    name: name.into(),
                    reason: "must be at least 1".into(),
                });
            }
        }
        if !self.parts.discrete && !self.parts.continuous {
            return Err(Error::InvalidArgument {
                name: "parts".into(),
                reason: "at least one parameter group must be enabled".into(),
            });
        }
        Ok(())
    }

    /// Number of rows each chain stores.
    pub fn stored_rows(&self) -> usize {
        self.draws / self.thin
    }
}

/// Deterministic starting state: zero coefficients, empirical intercepts,
/// unit latent weights and precision, smoothing variances at 10.
pub fn initialize_state(spec: &ModelSpec, obs: &ObservationSet) -> ModelState {
    const NU_INIT: f64 = 10.0;
    let n = obs.n() as f64;
    let n0 = obs.n_zero() as f64;
    let n1 = obs.n_one() as f64;
    let n_c = obs.n_interior() as f64;
    // Empirical log odds of each boundary against the reference category.
    // Empty cells get a half-count correction against everything else so
    // the intercept stays finite and monotone in n.
    let log_odds = |boundary: f64| -> f64 {
        let reference = match spec.inflation {
            InflationKind::ZeroAndOne => n_c,
            _ => n - boundary,
        };
        if boundary <= 0.0 {
            (0.5 / (n - 0.5).max(0.5)).ln()
        } else if reference <= 0.0 {
            (boundary / 0.5).ln()
        } else {
            (boundary / reference).ln()
        }
    };
    let mut state = ModelState {
        discrete0: spec.discrete0.as_ref().map(|p| PredictorState::zeros(p, NU_INIT)),
        discrete1: spec.discrete1.as_ref().map(|p| PredictorState::zeros(p, NU_INIT)),
        continuous: PredictorState::zeros(&spec.continuous, NU_INIT),
        w: Array1::from_elem(obs.n_interior(), 1.0),
        delta_sq: 1.0,
    };
    if let Some(d0) = state.discrete0.as_mut() {
        d0.intercept = log_odds(n0);
    }
    if let Some(d1) = state.discrete1.as_mut() {
        d1.intercept = log_odds(n1);
    }
    state.continuous.intercept = if obs.n_interior() > 0 {
        let mut sorted: Vec<f64> = obs.y_logit().to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        quantile_type7(&sorted, spec.tau)
    } else {
        0.0
    };
    state
}

/// Coefficient-block update schedule for one iteration, in fixed order:
/// zero part, one part, continuous part; intercept first within each.
pub fn update_schedule(spec: &ModelSpec, parts: SamplerParts) -> Vec<BlockRef> {
    let mut refs = Vec::new();
    for pred_id in 0..3usize {
        let enabled = if pred_id == 2 { parts.continuous } else { parts.discrete };
        if !enabled {
            continue;
        }
        let Some(pred) = spec.predictor(pred_id) else { continue };
        refs.push(BlockRef { pred_id, block: BlockId::Intercept });
        for k in 0..pred.blocks.len() {
            refs.push(BlockRef { pred_id, block: BlockId::Block(k) });
        }
    }
    refs
}

/// Names of all stored parameters, in storage column order: intercepts and
/// coefficients per predictor, smoothing variances, the precision, and
/// optionally the latent weights (named by original data row).
pub fn parameter_names(spec: &ModelSpec, obs: &ObservationSet, store_latent_weights: bool) -> Vec<String> {
    let mut names = Vec::new();
    for pred_id in 0..3usize {
        let Some(pred) = spec.predictor(pred_id) else { continue };
        names.push(format!("pred{pred_id}.intercept"));
        for block in &pred.blocks {
            for l in 0..block.n_coef() {
                names.push(format!("pred{pred_id}.{}[{l}]", block.label));
            }
        }
    }
    for pred_id in 0..3usize {
        let Some(pred) = spec.predictor(pred_id) else { continue };
        for block in &pred.blocks {
            if block.is_penalized() {
                names.push(format!("nu_sq.pred{pred_id}.{}", block.label));
            }
        }
    }
    names.push("delta_sq".into());
    if store_latent_weights {
        for &row in obs.interior_idx() {
            names.push(format!("w[{row}]"));
        }
    }
    names
}

fn record_row(spec: &ModelSpec, state: &ModelState, store_latent_weights: bool, out: &mut Vec<f64>) {
    out.clear();
    for pred_id in 0..3usize {
        let Some(p) = state.predictor(pred_id) else { continue };
        out.push(p.intercept);
        for beta in &p.coefs {
            out.extend(beta.iter());
        }
    }
    for pred_id in 0..3usize {
        let (Some(pred), Some(p)) = (spec.predictor(pred_id), state.predictor(pred_id)) else {
            continue;
        };
        for (block, nu) in pred.blocks.iter().zip(&p.nu_sq) {
            if block.is_penalized() {
                out.push(nu.expect("penalized block has a smoothing variance"));
            }
        }
    }
    out.push(state.delta_sq);
    if store_latent_weights {
        out.extend(state.w.iter());
    }
}

/// Per-block acceptance rate over the sampling phase.
#[derive(Debug, Clone)]
pub struct BlockAcceptance {
    pub block: String,
    pub rate: f64,
}

/// Everything one chain produces.
#[derive(Debug, Clone)]
pub struct ChainDraws {
    pub chain_id: usize,
    pub parameter_names: Vec<String>,
    /// Stored draws, one row per retained iteration.
    pub values: Array2<f64>,
    pub accept_rates: Vec<BlockAcceptance>,
    pub warnings: Vec<String>,
}

fn abort(chain: usize, iteration: usize, err: Error) -> Error {
    match err {
        Error::NonFinite { block, what } => Error::ChainAbort {
            chain,
            iteration,
            block,
            reason: format!("non-finite {what}"),
        },
        Error::CholeskyFailure { block } => Error::ChainAbort {
            chain,
            iteration,
            block,
            reason: "proposal precision not positive definite after jitter escalation".into(),
        },
        other => other,
    }
}

/// Run a single chain. Results depend only on the inputs and `chain_id`,
/// never on scheduling, so reruns are bit-reproducible.
pub fn run_chain(
    spec: &ModelSpec,
    obs: &ObservationSet,
    cfg: &RunConfig,
    chain_id: usize,
) -> Result<ChainDraws> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
    rng.set_stream(chain_id as u64);

    let mut state = initialize_state(spec, obs);
    let schedule = update_schedule(spec, cfg.parts);
    let mut adapters: Vec<DualAveraging> =
        schedule.iter().map(|_| DualAveraging::new(EPS_INIT, MH_TARGET_ACCEPT)).collect();
    let mut frozen_eps: Vec<Option<f64>> = vec![None; schedule.len()];
    let mut accepted = vec![0usize; schedule.len()];
    let mut proposed = vec![0usize; schedule.len()];
    let mut skipped = vec![false; schedule.len()];

    let names = parameter_names(spec, obs, cfg.store_latent_weights);
    let rows = cfg.stored_rows();
    let mut values = Array2::<f64>::zeros((rows, names.len()));
    let mut row_buf = Vec::with_capacity(names.len());
    let mut stored = 0usize;
    let mut clamped_total = 0usize;

    let total = cfg.warmup + cfg.draws;
    for t in 0..total {
        let sampling = t >= cfg.warmup;
        for (i, &at) in schedule.iter().enumerate() {
            let eps = if sampling {
                *frozen_eps[i].get_or_insert_with(|| {
                    if adapters[i].steps() > 0 { adapters[i].averaged_eps() } else { EPS_INIT }
                })
            } else {
                adapters[i].current_eps()
            };
            match iwls_mh_update(spec, obs, &mut state, at, eps, &mut rng)
                .map_err(|e| abort(chain_id, t, e))?
            {
                MhOutcome::Skipped => skipped[i] = true,
                MhOutcome::Proposed { accepted: acc, accept_prob } => {
                    if sampling {
                        proposed[i] += 1;
                        accepted[i] += acc as usize;
                    } else {
                        adapters[i].step(accept_prob);
                    }
                }
            }
        }

        // Smoothing variances, in the same predictor order.
        for pred_id in 0..3usize {
            let enabled = if pred_id == 2 { cfg.parts.continuous } else { cfg.parts.discrete };
            if !enabled {
                continue;
            }
            let Some(pred) = spec.predictor(pred_id) else { continue };
            for k in 0..pred.blocks.len() {
                let block = &pred.blocks[k];
                if !block.is_penalized() {
                    continue;
                }
                let beta = state.predictor(pred_id).unwrap().coefs[k].clone();
                let nu = gibbs_smoothing_variance(
                    &beta.view(),
                    &block.penalty.view(),
                    block.penalty_rank,
                    block.hyper_a.expect("penalized block carries hyperparameters"),
                    block.hyper_b.expect("penalized block carries hyperparameters"),
                    &mut rng,
                );
                if !nu.is_finite() || nu <= 0.0 {
                    return Err(Error::ChainAbort {
                        chain: chain_id,
                        iteration: t,
                        block: block_label(spec, BlockRef { pred_id, block: BlockId::Block(k) }),
                        reason: format!("smoothing variance draw {nu} out of range"),
                    });
                }
                state.predictor_mut(pred_id).unwrap().nu_sq[k] = Some(nu);
            }
        }

        // Latent weights and precision.
        if cfg.parts.continuous {
            let eta2 = linear_predictor(&spec.continuous, &state.continuous, obs.n());
            clamped_total += gibbs_latent_weights(spec, obs, &mut state, &eta2.view(), &mut rng);
            let delta_sq = gibbs_delta_sq(spec, obs, &state, &eta2.view(), &mut rng);
            if !delta_sq.is_finite() || delta_sq <= 0.0 {
                return Err(Error::ChainAbort {
                    chain: chain_id,
                    iteration: t,
                    block: "delta_sq".into(),
                    reason: format!("precision draw {delta_sq} out of range"),
                });
            }
            state.delta_sq = delta_sq;
        }

        if sampling && (t - cfg.warmup + 1) % cfg.thin == 0 {
            record_row(spec, &state, cfg.store_latent_weights, &mut row_buf);
            if let Some(bad) = row_buf.iter().position(|v| !v.is_finite()) {
                return Err(Error::ChainAbort {
                    chain: chain_id,
                    iteration: t,
                    block: names[bad].clone(),
                    reason: "stored draw is not finite".into(),
                });
            }
            values.row_mut(stored).assign(&Array1::from_vec(row_buf.clone()));
            stored += 1;
        }
    }
    debug_assert_eq!(stored, rows);

    let mut warnings = Vec::new();
    for (i, flag) in skipped.iter().enumerate() {
        if *flag {
            warnings.push(format!(
                "block `{}` carries no information (no data, flat prior); left at its initial value",
                block_label(spec, schedule[i])
            ));
        }
    }
    if clamped_total > 0 {
        warnings.push(format!(
            "latent-weight residual clamped {clamped_total} time(s) at +-1e-12"
        ));
    }
    let accept_rates = schedule
        .iter()
        .enumerate()
        .filter(|(i, _)| proposed[*i] > 0)
        .map(|(i, &at)| BlockAcceptance {
            block: block_label(spec, at),
            rate: accepted[i] as f64 / proposed[i] as f64,
        })
        .collect();

    Ok(ChainDraws { chain_id, parameter_names: names, values, accept_rates, warnings })
}

/// Run all chains, distributing them over at most `max_workers` threads.
/// Chains are independent and seeded by stream, so the result is identical
/// whatever the thread count.
pub fn run_chains(spec: &ModelSpec, obs: &ObservationSet, cfg: &RunConfig) -> Result<Vec<ChainDraws>> {
    cfg.validate()?;
    let hardware = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let workers = cfg.max_workers.unwrap_or(hardware).max(1).min(cfg.n_chains);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ChainDraws>>>> =
        Mutex::new((0..cfg.n_chains).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let chain_id = next.fetch_add(1, Ordering::Relaxed);
                if chain_id >= cfg.n_chains {
                    break;
                }
                let out = run_chain(spec, obs, cfg, chain_id);
                results.lock().unwrap()[chain_id] = Some(out);
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every chain index was claimed by a worker"))
        .collect()
}
