//! Engine-level invariants: a block that sees no data reproduces its
//! smoothing prior exactly, per-chain output is independent of how many
//! chains run alongside, and uninformative flat blocks are skipped with
//! a warning instead of aborting the chain.

mod common;

use common::{inverse_gamma_cdf, ks_pvalue, ks_statistic};
use inflaquant::design::{DesignBlock, TermRecipe};
use inflaquant::engine::{run_chains, RunConfig};
use inflaquant::model::{
    partition_observations, InflationKind, ModelSpec, PredictorSpec,
};
use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn ghost_block(rows: usize, k: usize, a: f64, b: f64) -> DesignBlock {
    DesignBlock {
        label: "ghost".into(),
        basis: Array2::zeros((rows, k)),
        penalty: Array2::eye(k),
        penalty_rank: k,
        hyper_a: Some(a),
        hyper_b: Some(b),
        constraint: None,
        recipe: TermRecipe::Linear { n_columns: k },
    }
}

fn mixed_responses(n: usize, zero_rate: f64, seed: u64) -> Array1<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array1::from_shape_fn(n, |_| {
        if rng.random::<f64>() < zero_rate {
            0.0
        } else {
            0.3 + 0.4 * rng.random::<f64>()
        }
    })
}

/// A penalized block whose basis is identically zero receives no
/// information from the data, so across the run its smoothing variance
/// must be an exact draw from its inverse-gamma prior.
#[test]
fn data_blind_block_reproduces_its_smoothing_prior() {
    let y = mixed_responses(25, 0.2, 11);
    let mut warnings = Vec::new();
    let obs = partition_observations(&y.view(), InflationKind::ZeroOnly, &mut warnings).unwrap();
    let (a, b) = (2.5, 1.5);
    let spec = ModelSpec::new(
        InflationKind::ZeroOnly,
        0.5,
        Some(PredictorSpec::default()),
        None,
        PredictorSpec::new(vec![ghost_block(obs.n(), 3, a, b)]),
    );
    let cfg = RunConfig {
        n_chains: 2,
        warmup: 500,
        draws: 15_000,
        thin: 20,
        base_seed: 7,
        ..RunConfig::default()
    };
    let chains = run_chains(&spec, &obs, &cfg).unwrap();
    let col = chains[0]
        .parameter_names
        .iter()
        .position(|n| n == "nu_sq.pred2.ghost")
        .expect("smoothing variance column present");
    let mut draws: Vec<f64> = chains
        .iter()
        .flat_map(|c| c.values.column(col).to_vec())
        .collect();
    assert_eq!(draws.len(), 1500);
    draws.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let d = ks_statistic(&draws, |x| inverse_gamma_cdf(x, a, b));
    let p = ks_pvalue(d, draws.len());
    assert!(p > 0.01, "KS p-value {p} (D={d}) against the IG({a}, {b}) prior");
}

/// Chains are seeded independently, so the draws of chain zero must not
/// depend on how many other chains run in the same call.
#[test]
fn per_chain_output_is_independent_of_chain_count() {
    let y = mixed_responses(30, 0.3, 12);
    let mut warnings = Vec::new();
    let obs = partition_observations(&y.view(), InflationKind::ZeroOnly, &mut warnings).unwrap();
    let spec = ModelSpec::new(
        InflationKind::ZeroOnly,
        0.4,
        Some(PredictorSpec::default()),
        None,
        PredictorSpec::default(),
    );
    let base = RunConfig {
        warmup: 50,
        draws: 60,
        base_seed: 99,
        ..RunConfig::default()
    };
    let solo = run_chains(&spec, &obs, &RunConfig { n_chains: 1, ..base.clone() }).unwrap();
    let quad = run_chains(&spec, &obs, &RunConfig { n_chains: 4, ..base }).unwrap();
    assert_eq!(solo.len(), 1);
    assert_eq!(quad.len(), 4);
    assert_eq!(solo[0].values, quad[0].values);
    assert_ne!(quad[0].values, quad[3].values);
}

/// A flat-prior block with all-zero columns has no score and no
/// curvature anywhere; the engine must leave it alone and say so.
#[test]
fn uninformative_flat_block_is_skipped_with_a_warning() {
    let y = mixed_responses(20, 0.25, 13);
    let mut warnings = Vec::new();
    let obs = partition_observations(&y.view(), InflationKind::ZeroOnly, &mut warnings).unwrap();
    let dead = DesignBlock {
        label: "dead".into(),
        basis: Array2::zeros((obs.n(), 2)),
        penalty: Array2::zeros((2, 2)),
        penalty_rank: 0,
        hyper_a: None,
        hyper_b: None,
        constraint: None,
        recipe: TermRecipe::Linear { n_columns: 2 },
    };
    let spec = ModelSpec::new(
        InflationKind::ZeroOnly,
        0.5,
        Some(PredictorSpec::new(vec![dead])),
        None,
        PredictorSpec::default(),
    );
    let cfg = RunConfig {
        n_chains: 1,
        warmup: 30,
        draws: 40,
        base_seed: 5,
        ..RunConfig::default()
    };
    let chains = run_chains(&spec, &obs, &cfg).unwrap();
    let chain = &chains[0];
    assert!(
        chain.warnings.iter().any(|w| w.contains("pred0.dead") && w.contains("no information")),
        "expected a skip warning, got {:?}",
        chain.warnings
    );
    let cols: Vec<usize> = chain
        .parameter_names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.starts_with("pred0.dead"))
        .map(|(i, _)| i)
        .collect();
    assert_eq!(cols.len(), 2);
    for c in cols {
        assert!(chain.values.column(c).iter().all(|v| *v == 0.0));
    }
}

/// Empty input is a validation error, not a crash or a silent run.
#[test]
fn empty_response_vector_is_rejected() {
    let y = Array1::<f64>::zeros(0);
    let mut warnings = Vec::new();
    let err = partition_observations(&y.view(), InflationKind::ZeroOnly, &mut warnings)
        .unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("no observations"));
}
