//! Fit artifacts on disk: one draw CSV per chain plus a JSON metadata
//! sidecar per quantile level. Numbers are written with 17 significant
//! digits so re-ingestion is bit-exact, and nothing non-deterministic
//! (timestamps, host names) enters the files: identical seeds must give
//! byte-identical output.

use crate::config::TermBinding;
use crate::error::{CliError, Result};
use inflaquant::engine::ChainDraws;
use inflaquant::model::ModelSpec;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Serializable view of a chain's per-block acceptance rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceEntry {
    pub block: String,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunEcho {
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub thin: usize,
    pub base_seed: u64,
    pub store_latent_weights: bool,
    pub share_discrete: bool,
    /// Seed handed to the engine for this level's run (differs from
    /// `base_seed` when several levels are fit from one configuration).
    pub level_seed: u64,
    /// Seed of the shared boundary-part run, when one was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_discrete_seed: Option<u64>,
}

/// Sidecar metadata: everything needed to interpret and re-use the draw
/// files without the original configuration or data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitMeta {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub tau: f64,
    pub n_obs: usize,
    pub n_interior: usize,
    pub run: RunEcho,
    pub parameter_names: Vec<String>,
    /// Model echo; design-matrix rows are rebuilt from recipes on demand.
    pub model: ModelSpec,
    /// Column bindings per predictor for evaluating at new data.
    pub bindings: [Vec<TermBinding>; 3],
    /// Per-chain sampler warnings.
    pub warnings: Vec<Vec<String>>,
    /// Per-chain acceptance rates over the sampling phase.
    pub accept_rates: Vec<Vec<AcceptanceEntry>>,
}

pub const FORMAT_VERSION: u32 = 1;

/// 17-significant-digit scientific notation; round-trips any f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Quantile level as it appears in artifact file names.
pub fn tau_tag(tau: f64) -> String {
    format!("{tau}")
}

pub fn meta_path(dir: &Path, tau: f64) -> PathBuf {
    dir.join(format!("meta_tau{}.json", tau_tag(tau)))
}

pub fn draws_path(dir: &Path, tau: f64, chain: usize) -> PathBuf {
    dir.join(format!("draws_tau{}_chain{chain}.csv", tau_tag(tau)))
}

pub fn write_meta(dir: &Path, meta: &FitMeta) -> Result<PathBuf> {
    let path = meta_path(dir, meta.tau);
    let mut file = std::fs::File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
    let text = serde_json::to_string_pretty(meta)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(path)
}

pub fn write_draws(dir: &Path, tau: f64, chain: &ChainDraws) -> Result<PathBuf> {
    let path = draws_path(dir, tau, chain.chain_id);
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", path.display())))?;
    writer.write_record(&chain.parameter_names)?;
    let mut record = Vec::with_capacity(chain.parameter_names.len());
    for row in chain.values.rows() {
        record.clear();
        record.extend(row.iter().map(|v| format_value(*v)));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(path)
}

/// A fit loaded back from disk, ready for prediction and diagnostics.
pub struct LoadedFit {
    pub meta: FitMeta,
    pub chains: Vec<ChainDraws>,
}

pub fn read_meta(dir: &Path, tau_tag_str: &str) -> Result<FitMeta> {
    let path = dir.join(format!("meta_tau{tau_tag_str}.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::validation(format!("cannot read `{}`: {e}", path.display()))
    })?;
    let meta: FitMeta = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("`{}`: {e}", path.display())))?;
    if meta.format_version != FORMAT_VERSION {
        return Err(CliError::validation(format!(
            "`{}` has format version {}, this build reads {}",
            path.display(),
            meta.format_version,
            FORMAT_VERSION
        )));
    }
    Ok(meta)
}

pub fn read_fit(dir: &Path, tau_tag_str: &str) -> Result<LoadedFit> {
    let meta = read_meta(dir, tau_tag_str)?;
    let n_params = meta.parameter_names.len();
    let mut chains = Vec::with_capacity(meta.run.chains);
    for chain_id in 0..meta.run.chains {
        let path = dir.join(format!("draws_tau{tau_tag_str}_chain{chain_id}.csv"));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&path)
            .map_err(|e| CliError::validation(format!("cannot open `{}`: {e}", path.display())))?;
        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
        if headers != meta.parameter_names {
            return Err(CliError::validation(format!(
                "`{}`: header does not match the sidecar's parameter names",
                path.display()
            )));
        }
        let mut values = Vec::new();
        let mut rows = 0usize;
        for record in reader.records() {
            let record = record?;
            if record.len() != n_params {
                return Err(CliError::validation(format!(
                    "`{}` row {}: {} fields, expected {}",
                    path.display(),
                    rows + 1,
                    record.len(),
                    n_params
                )));
            }
            for field in record.iter() {
                values.push(field.parse::<f64>().map_err(|_| {
                    CliError::validation(format!(
                        "`{}` row {}: `{field}` is not a number",
                        path.display(),
                        rows + 1
                    ))
                })?);
            }
            rows += 1;
        }
        let values = Array2::from_shape_vec((rows, n_params), values)
            .expect("row-major draw matrix");
        chains.push(ChainDraws {
            chain_id,
            parameter_names: meta.parameter_names.clone(),
            values,
            accept_rates: Vec::new(),
            warnings: Vec::new(),
        });
    }
    Ok(LoadedFit { meta, chains })
}

/// Quantile levels present in a fit directory, by scanning sidecars.
pub fn discover_tau_tags(dir: &Path) -> Result<Vec<String>> {
    let mut tags = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::validation(format!("cannot list `{}`: {e}", dir.display())))?;
    for entry in entries {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(tag) = name.strip_prefix("meta_tau").and_then(|s| s.strip_suffix(".json")) {
            tags.push(tag.to_string());
        }
    }
    tags.sort_by(|a, b| {
        let (fa, fb) = (a.parse::<f64>(), b.parse::<f64>());
        match (fa, fb) {
            (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal),
            _ => a.cmp(b),
        }
    });
    if tags.is_empty() {
        return Err(CliError::validation(format!(
            "no fit artifacts (meta_tau*.json) in `{}`",
            dir.display()
        )));
    }
    Ok(tags)
}
