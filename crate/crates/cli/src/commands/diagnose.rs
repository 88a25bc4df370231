//! The diagnose command: convergence and mixing summaries for a stored
//! fit — split-chain scale reduction, bulk effective sample size,
//! posterior summaries, and per-block acceptance rates — as CSV files
//! and a human-readable table.

use crate::artifacts::{format_value, read_fit};
use crate::commands::predict::resolve_tags;
use crate::error::{CliError, Result};
use clap::Args;
use inflaquant::diagnostics::summarize;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Directory with fit artifacts.
    #[arg(long)]
    pub fit: PathBuf,
    /// Quantile level(s) to summarize; default: every level in the fit.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Probability of the reported equal-tailed interval.
    #[arg(long, default_value_t = 0.95)]
    pub prob: f64,
    /// Output directory; defaults to the fit directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const RHAT_FLAG: f64 = 1.05;

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    if !(args.prob > 0.0 && args.prob < 1.0) {
        return Err(CliError::validation(format!("prob {} outside (0, 1)", args.prob)));
    }
    let out_dir = args.out.clone().unwrap_or_else(|| args.fit.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", out_dir.display())))?;

    for tag in resolve_tags(&args.fit, &args.tau)? {
        let fit = read_fit(&args.fit, &tag)?;
        let summaries = summarize(&fit.chains, args.prob)?;

        let path = out_dir.join(format!("diagnostics_tau{tag}.csv"));
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
        writer.write_record([
            "parameter", "mean", "sd", "ci_lower", "ci_upper", "rhat", "ess_bulk",
        ])?;
        for s in &summaries {
            writer.write_record([
                s.name.clone(),
                format_value(s.mean),
                format_value(s.sd),
                format_value(s.ci_lower),
                format_value(s.ci_upper),
                format_value(s.rhat),
                format_value(s.ess_bulk),
            ])?;
        }
        writer.flush().map_err(|e| CliError::Io(e.to_string()))?;

        let accept_path = out_dir.join(format!("acceptance_tau{tag}.csv"));
        let mut writer = csv::Writer::from_path(&accept_path)
            .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", accept_path.display())))?;
        writer.write_record(["chain", "block", "accept_rate"])?;
        for (chain_id, rates) in fit.meta.accept_rates.iter().enumerate() {
            for entry in rates {
                writer.write_record([
                    format!("{chain_id}"),
                    entry.block.clone(),
                    format_value(entry.rate),
                ])?;
            }
        }
        writer.flush().map_err(|e| CliError::Io(e.to_string()))?;

        println!("tau = {tag} ({} draws x {} chains)", fit.chains[0].values.nrows(), fit.chains.len());
        println!(
            "{:<28} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8}",
            "parameter", "mean", "sd", "lower", "upper", "rhat", "ess"
        );
        for s in &summaries {
            let flag = if s.rhat.is_nan() || s.rhat > RHAT_FLAG { " <-- check" } else { "" };
            println!(
                "{:<28} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.3} {:>8.0}{flag}",
                s.name, s.mean, s.sd, s.ci_lower, s.ci_upper, s.rhat, s.ess_bulk
            );
        }
        for (chain_id, rates) in fit.meta.accept_rates.iter().enumerate() {
            let line: Vec<String> =
                rates.iter().map(|a| format!("{} {:.2}", a.block, a.rate)).collect();
            println!("chain {chain_id} acceptance: {}", line.join(", "));
        }
        for (chain_id, warnings) in fit.meta.warnings.iter().enumerate() {
            for w in warnings {
                println!("chain {chain_id} warning: {w}");
            }
        }
        println!("wrote `{}` and `{}`", path.display(), accept_path.display());
    }
    Ok(())
}
