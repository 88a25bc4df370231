//! The fit command: read configuration and data, sample every requested
//! quantile level, and write draw files plus metadata sidecars. With
//! `--share-discrete`, the boundary part is sampled once and its draws
//! are spliced into every level's output; the posterior factorizes over
//! the two parts, so the combination is a valid joint sample.

use crate::artifacts::{
    write_draws, write_meta, AcceptanceEntry, FitMeta, RunEcho, FORMAT_VERSION,
};
use crate::config::{build_model, load_config, FitConfig};
use crate::data::Dataset;
use crate::error::{CliError, Result};
use clap::Args;
use inflaquant::engine::{run_chains, ChainDraws, RunConfig, SamplerParts};
use inflaquant::model::partition_observations;
use inflaquant::simulate::derive_seed;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the seed from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Override the warmup iterations per chain.
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Override the post-warmup draws per chain.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Override the quantile levels (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Sample the boundary part once and reuse it across levels.
    #[arg(long)]
    pub share_discrete: bool,
    /// Override the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn apply_overrides(cfg: &mut FitConfig, args: &FitArgs) {
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(c) = args.chains {
        cfg.run.chains = c;
    }
    if let Some(w) = args.warmup {
        cfg.run.warmup = w;
    }
    if let Some(d) = args.draws {
        cfg.run.draws = d;
    }
    if !args.tau.is_empty() {
        cfg.model.tau = args.tau.clone();
    }
    if args.share_discrete {
        cfg.run.share_discrete = true;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
}

/// Column indices of the boundary-part parameters (coefficients and
/// smoothing variances of predictors 0 and 1).
fn discrete_columns(names: &[String]) -> Vec<usize> {
    names
        .iter()
        .enumerate()
        .filter(|(_, n)| {
            n.starts_with("pred0.")
                || n.starts_with("pred1.")
                || n.starts_with("nu_sq.pred0.")
                || n.starts_with("nu_sq.pred1.")
        })
        .map(|(i, _)| i)
        .collect()
}

fn splice_discrete(level: &mut [ChainDraws], shared: &[ChainDraws]) -> Result<()> {
    for (lc, sc) in level.iter_mut().zip(shared) {
        if lc.parameter_names != sc.parameter_names {
            return Err(CliError::Sampler(
                "shared and level runs disagree on parameter layout".into(),
            ));
        }
        if lc.values.nrows() != sc.values.nrows() {
            return Err(CliError::Sampler(
                "shared and level runs disagree on stored row count".into(),
            ));
        }
        for col in discrete_columns(&lc.parameter_names) {
            lc.values.column_mut(col).assign(&sc.values.column(col));
        }
        // Acceptance rates and warnings of the boundary blocks come from
        // the run that actually updated them.
        lc.accept_rates.extend(sc.accept_rates.iter().cloned());
        lc.warnings.extend(sc.warnings.iter().cloned());
    }
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, args);
    cfg.validate()?;
    let config_dir = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();

    let data_path = if cfg.data.path.is_absolute() {
        cfg.data.path.clone()
    } else {
        config_dir.join(&cfg.data.path)
    };
    let data = Dataset::from_csv(&data_path)?;
    let y = data.numeric(&cfg.data.response)?;
    let inflation = crate::config::parse_inflation(&cfg.model.inflation)?;
    let mut data_warnings = Vec::new();
    let obs = partition_observations(&y.view(), inflation, &mut data_warnings)?;
    for w in &data_warnings {
        eprintln!("warning: {w}");
    }

    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| {
        CliError::Io(format!("cannot create `{}`: {e}", cfg.output.dir.display()))
    })?;
    let max_workers = super::threads_from_env()?;

    let base_run = RunConfig {
        n_chains: cfg.run.chains,
        warmup: cfg.run.warmup,
        draws: cfg.run.draws,
        thin: cfg.run.thin,
        base_seed: 0, // set per run below
        store_latent_weights: cfg.run.store_latent_weights,
        parts: SamplerParts::default(),
        max_workers,
    };

    // Optional shared boundary-part run.
    let shared_discrete_seed =
        cfg.run.share_discrete.then(|| derive_seed(cfg.run.seed, 1000));
    let shared = match shared_discrete_seed {
        Some(seed) => {
            let mut warnings = Vec::new();
            let built =
                build_model(&cfg, &data, &config_dir, cfg.model.tau[0], &mut warnings)?;
            let run = RunConfig {
                base_seed: seed,
                parts: SamplerParts { discrete: true, continuous: false },
                ..base_run.clone()
            };
            run.validate()?;
            println!("sampling shared boundary part ({} chains)", run.n_chains);
            Some(run_chains(&built.spec, &obs, &run)?)
        }
        None => None,
    };

    for (i, &tau) in cfg.model.tau.iter().enumerate() {
        let mut build_warnings = Vec::new();
        let built = build_model(&cfg, &data, &config_dir, tau, &mut build_warnings)?;
        for w in &build_warnings {
            eprintln!("warning: {w}");
        }
        let level_seed = derive_seed(cfg.run.seed, 2000 + i as u64);
        let run = RunConfig {
            base_seed: level_seed,
            parts: match &shared {
                Some(_) => SamplerParts { discrete: false, continuous: true },
                None => SamplerParts::default(),
            },
            ..base_run.clone()
        };
        run.validate()?;
        println!("sampling tau = {tau} ({} chains)", run.n_chains);
        let mut chains = run_chains(&built.spec, &obs, &run)?;
        if let Some(shared_chains) = &shared {
            splice_discrete(&mut chains, shared_chains)?;
        }

        for chain in &chains {
            for w in &chain.warnings {
                eprintln!("warning (tau {tau}, chain {}): {w}", chain.chain_id);
            }
        }
        let meta = FitMeta {
            format_version: FORMAT_VERSION,
            tool: "inflaquant".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            tau,
            n_obs: obs.n(),
            n_interior: obs.n_interior(),
            run: RunEcho {
                chains: cfg.run.chains,
                warmup: cfg.run.warmup,
                draws: cfg.run.draws,
                thin: cfg.run.thin,
                base_seed: cfg.run.seed,
                store_latent_weights: cfg.run.store_latent_weights,
                share_discrete: cfg.run.share_discrete,
                level_seed,
                shared_discrete_seed,
            },
            parameter_names: chains[0].parameter_names.clone(),
            model: built.spec.clone(),
            bindings: built.bindings.clone(),
            warnings: chains.iter().map(|c| c.warnings.clone()).collect(),
            accept_rates: chains
                .iter()
                .map(|c| {
                    c.accept_rates
                        .iter()
                        .map(|a| AcceptanceEntry { block: a.block.clone(), rate: a.rate })
                        .collect()
                })
                .collect(),
        };
        let meta_file = write_meta(&cfg.output.dir, &meta)?;
        for chain in &chains {
            write_draws(&cfg.output.dir, tau, chain)?;
        }
        println!(
            "wrote {} chains and `{}`",
            chains.len(),
            meta_file.display()
        );
    }
    Ok(())
}
