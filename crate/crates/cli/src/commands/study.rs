//! The replicate-study command: repeatedly simulate, fit, and score a
//! scenario, writing per-replicate metrics (quantile and boundary
//! probability RMSE, interval coverage, convergence of the core
//! parameters) plus the shared test points.

use crate::artifacts::format_value;
use crate::commands::simulate::parse_scenario;
use crate::error::{CliError, Result};
use clap::Args;
use inflaquant::simulate::{run_replicate_study, StudySettings};
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Generating scenario: "ald-logit" or "logit-t".
    #[arg(long, default_value = "ald-logit")]
    pub scenario: String,
    /// Observations per replicate.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Inflation level; larger values shrink the boundary mass.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Quantile level(s) to fit (repeat or comma-separate).
    #[arg(long = "tau", value_delimiter = ',', default_values_t = [0.5])]
    pub taus: Vec<f64>,
    /// Number of replicates.
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    /// Base seed for the response streams and fits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of the covariate and test-point streams.
    #[arg(long, default_value_t = 7)]
    pub covariate_seed: u64,
    /// Number of test points for curve scoring.
    #[arg(long, default_value_t = 100)]
    pub n_test: usize,
    /// Spline basis size used in the fitted models.
    #[arg(long, default_value_t = 20)]
    pub n_basis: usize,
    /// Chains per fit.
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Warmup iterations per chain.
    #[arg(long, default_value_t = 500)]
    pub warmup: usize,
    /// Post-warmup draws per chain.
    #[arg(long, default_value_t = 3000)]
    pub draws: usize,
    /// Thinning interval.
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Fit the boundary part once per replicate and share it across
    /// quantile levels (logit-t scenario only).
    #[arg(long)]
    pub share_discrete: bool,
    /// Output directory.
    #[arg(long, default_value = "study-output")]
    pub out: PathBuf,
}

pub fn cmd_replicate_study(args: &StudyArgs) -> Result<()> {
    let settings = StudySettings {
        kind: parse_scenario(&args.scenario)?,
        n: args.n,
        k: args.k,
        taus: args.taus.clone(),
        replicates: args.replicates,
        seed: args.seed,
        covariate_seed: args.covariate_seed,
        n_test: args.n_test,
        n_basis: args.n_basis,
        chains: args.chains,
        warmup: args.warmup,
        draws: args.draws,
        thin: args.thin,
        share_discrete: args.share_discrete,
        max_workers: super::threads_from_env()?,
    };
    println!(
        "running {} replicate(s) of {} at tau = {:?}",
        settings.replicates, args.scenario, settings.taus
    );
    let result = run_replicate_study(&settings)?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", args.out.display())))?;

    let metrics_path = args.out.join("metrics.csv");
    let mut writer = csv::Writer::from_path(&metrics_path)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", metrics_path.display())))?;
    writer.write_record([
        "replicate",
        "tau",
        "rmse_quantile",
        "rmse_p0",
        "rmse_p1",
        "coverage_quantile",
        "coverage_p0",
        "coverage_p1",
        "max_core_rhat",
        "min_core_ess",
    ])?;
    for m in &result.metrics {
        let max_rhat = m.core_rhat.iter().map(|(_, v)| *v).fold(f64::NAN, f64::max);
        let min_ess = m.core_ess.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
        writer.write_record([
            format!("{}", m.replicate),
            format!("{}", m.tau),
            format_value(m.rmse_quantile),
            format_value(m.rmse_p0),
            format_value(m.rmse_p1),
            format_value(m.coverage_quantile),
            format_value(m.coverage_p0),
            format_value(m.coverage_p1),
            format_value(max_rhat),
            format_value(min_ess),
        ])?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;

    let points_path = args.out.join("test_points.csv");
    let mut writer = csv::Writer::from_path(&points_path)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", points_path.display())))?;
    writer.write_record(["x1", "x2"])?;
    for i in 0..result.test_x1.len() {
        writer.write_record([format_value(result.test_x1[i]), format_value(result.test_x2[i])])?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;

    for &tau in &args.taus {
        let rows: Vec<_> = result.metrics.iter().filter(|m| m.tau == tau).collect();
        if rows.is_empty() {
            continue;
        }
        let n = rows.len() as f64;
        let mean = |f: fn(&&inflaquant::simulate::ReplicateMetrics) -> f64| {
            rows.iter().map(f).sum::<f64>() / n
        };
        println!(
            "tau = {tau}: mean rmse quantile {:.4}, p0 {:.4}, p1 {:.4}; \
             mean coverage quantile {:.3}, p0 {:.3}, p1 {:.3}",
            mean(|m| m.rmse_quantile),
            mean(|m| m.rmse_p0),
            mean(|m| m.rmse_p1),
            mean(|m| m.coverage_quantile),
            mean(|m| m.coverage_p0),
            mean(|m| m.coverage_p1),
        );
    }
    println!("wrote `{}` and `{}`", metrics_path.display(), points_path.display());
    Ok(())
}
