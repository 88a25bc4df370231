//! The predict command: evaluate a stored fit at new covariate values,
//! writing posterior means and equal-tailed interval bounds for the
//! conditional quantile curve and the boundary probabilities.

use crate::artifacts::{format_value, read_fit, discover_tau_tags, LoadedFit};
use crate::config::{TermBinding, TermKind};
use crate::data::Dataset;
use crate::error::{CliError, Result};
use clap::Args;
use inflaquant::design::BlockInput;
use inflaquant::diagnostics::{
    boundary_prob_draws, column_interval, column_means, quantile_curve_draws,
};
use ndarray::Array2;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Directory with fit artifacts.
    #[arg(long)]
    pub fit: PathBuf,
    /// CSV of new covariate values (same column names as the fit data).
    #[arg(long)]
    pub data: PathBuf,
    /// Quantile level(s) to predict; default: every level in the fit.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Interval probability for the lower/upper columns.
    #[arg(long, default_value_t = 0.95)]
    pub prob: f64,
    /// Output directory; defaults to the fit directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Rebuild the per-block covariate inputs of one predictor at new data.
pub fn bound_inputs(bindings: &[TermBinding], data: &Dataset) -> Result<Vec<BlockInput>> {
    bindings
        .iter()
        .map(|b| {
            Ok(match b.kind {
                TermKind::Pspline => BlockInput::Continuous(data.numeric(&b.columns[0])?),
                TermKind::Varying => BlockInput::Varying {
                    by: data.numeric(&b.columns[0])?,
                    x: data.numeric(&b.columns[1])?,
                },
                TermKind::Mrf | TermKind::RandomIntercept => {
                    let levels = b.levels.as_ref().ok_or_else(|| {
                        CliError::validation(
                            "fit metadata lacks factor levels for a term".to_string(),
                        )
                    })?;
                    BlockInput::Levels(data.factor(&b.columns[0], levels)?)
                }
                TermKind::Linear => {
                    let mut cols = Array2::<f64>::zeros((data.n_rows(), b.columns.len()));
                    for (j, name) in b.columns.iter().enumerate() {
                        cols.column_mut(j).assign(&data.numeric(name)?);
                    }
                    BlockInput::Columns(cols)
                }
            })
        })
        .collect()
}

/// Map requested quantile levels onto the artifact tags present in a
/// fit directory; with no request, every level found is used.
pub fn resolve_tags(fit_dir: &std::path::Path, taus: &[f64]) -> Result<Vec<String>> {
    let available = discover_tau_tags(fit_dir)?;
    if taus.is_empty() {
        return Ok(available);
    }
    taus.iter()
        .map(|t| {
            let tag = format!("{t}");
            if available.contains(&tag) {
                Ok(tag)
            } else {
                Err(CliError::validation(format!(
                    "no fit for tau = {t} in `{}`; available: {}",
                    fit_dir.display(),
                    available.join(", ")
                )))
            }
        })
        .collect()
}

pub fn predict_one(
    fit: &LoadedFit,
    data: &Dataset,
    prob: f64,
) -> Result<(Vec<(String, Vec<f64>)>, Vec<String>)> {
    let n_new = data.n_rows();
    let spec = &fit.meta.model;
    let mut warnings = Vec::new();

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let push_summary = |prefix: &str, draws: &Array2<f64>, cols: &mut Vec<(String, Vec<f64>)>| {
        let mean = column_means(&draws.view());
        let (lo, hi) = column_interval(&draws.view(), prob);
        cols.push((format!("{prefix}_mean"), mean.to_vec()));
        cols.push((format!("{prefix}_lower"), lo.to_vec()));
        cols.push((format!("{prefix}_upper"), hi.to_vec()));
    };

    let q_inputs = bound_inputs(&fit.meta.bindings[2], data)?;
    let q_draws = quantile_curve_draws(spec, &fit.chains, &q_inputs, n_new, &mut warnings)?;
    push_summary("quantile", &q_draws, &mut columns);

    let inputs0 = match spec.discrete0.as_ref() {
        Some(_) => Some(bound_inputs(&fit.meta.bindings[0], data)?),
        None => None,
    };
    let inputs1 = match spec.discrete1.as_ref() {
        Some(_) => Some(bound_inputs(&fit.meta.bindings[1], data)?),
        None => None,
    };
    let (p0_draws, p1_draws) = boundary_prob_draws(
        spec,
        &fit.chains,
        inputs0.as_deref(),
        inputs1.as_deref(),
        n_new,
        &mut warnings,
    )?;
    if spec.discrete0.is_some() {
        push_summary("p0", &p0_draws, &mut columns);
    }
    if spec.discrete1.is_some() {
        push_summary("p1", &p1_draws, &mut columns);
    }
    Ok((columns, warnings))
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    if !(args.prob > 0.0 && args.prob < 1.0) {
        return Err(CliError::validation(format!("prob {} outside (0, 1)", args.prob)));
    }
    let data = Dataset::from_csv(&args.data)?;
    let out_dir = args.out.clone().unwrap_or_else(|| args.fit.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", out_dir.display())))?;

    for tag in resolve_tags(&args.fit, &args.tau)? {
        let fit = read_fit(&args.fit, &tag)?;
        let (columns, warnings) = predict_one(&fit, &data, args.prob)?;
        for w in &warnings {
            eprintln!("warning (tau {tag}): {w}");
        }
        let path = out_dir.join(format!("predictions_tau{tag}.csv"));
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
        let mut header = vec!["row".to_string()];
        header.extend(columns.iter().map(|(name, _)| name.clone()));
        writer.write_record(&header)?;
        for i in 0..data.n_rows() {
            let mut record = vec![format!("{i}")];
            record.extend(columns.iter().map(|(_, v)| format_value(v[i])));
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
        println!("wrote `{}`", path.display());
    }
    Ok(())
}
