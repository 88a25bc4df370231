//! Declarative model configuration: a single TOML file describing the
//! data source, the inflation kind, the terms of each predictor, and the
//! run settings. The same structures are echoed into the fit metadata so
//! that prediction can rebuild every design matrix without the original
//! configuration file.

use crate::data::Dataset;
use crate::error::{CliError, Result};
use inflaquant::design::{
    build_gmrf_term, build_linear_term, build_pspline_term, build_random_intercept,
    build_varying_term, AdjacencyGraph, DesignBlock, PsplineOptions, RANDOM_INTERCEPT_HYPER,
};
use inflaquant::model::{InflationKind, ModelSpec, PredictorSpec};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Top-level configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub data: DataSection,
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV file with a header row.
    pub path: PathBuf,
    /// Name of the response column; values must lie in [0, 1].
    pub response: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// "zero", "one", or "zero_and_one".
    pub inflation: String,
    /// Quantile levels to fit, each in (0, 1).
    pub tau: Vec<f64>,
    /// Terms of the zero-boundary predictor (intercept is implicit).
    #[serde(default)]
    pub zero: PredictorSection,
    /// Terms of the one-boundary predictor.
    #[serde(default)]
    pub one: PredictorSection,
    /// Terms of the interior quantile predictor.
    #[serde(default)]
    pub continuous: PredictorSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSection {
    #[serde(default)]
    pub terms: Vec<TermConfig>,
}

/// One additive term. `type` selects the basis; the remaining fields are
/// interpreted per type and rejected when they do not apply.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    #[serde(rename = "type")]
    pub kind: TermKind,
    /// Covariate column(s): one for pspline/mrf/random_intercept, the
    /// interacting column followed by the smooth column for varying,
    /// one or more for linear.
    pub columns: Vec<String>,
    /// Label used in parameter names; defaults to a name derived from
    /// the type and columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Spline basis size (pspline and varying).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_basis: Option<usize>,
    /// Spline degree (pspline and varying).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Difference-penalty order (pspline and varying).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff_order: Option<usize>,
    /// Inverse-gamma shape of the smoothing-variance prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyper_a: Option<f64>,
    /// Inverse-gamma scale of the smoothing-variance prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyper_b: Option<f64>,
    /// Edge list file for mrf terms; required there, rejected elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<PathBuf>,
    /// Factor level ordering. Required for mrf (it fixes the region
    /// indices used by the adjacency file); optional for
    /// random_intercept (default: order of first appearance).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Linear,
    Pspline,
    Mrf,
    RandomIntercept,
    Varying,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub thin: usize,
    pub seed: u64,
    pub store_latent_weights: bool,
    pub share_discrete: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            chains: 4,
            warmup: 1500,
            draws: 5000,
            thin: 1,
            seed: 0,
            store_latent_weights: false,
            share_discrete: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("fit-output") }
    }
}

pub fn load_config(path: &Path) -> Result<FitConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read config `{}`: {e}", path.display()))
    })?;
    let cfg: FitConfig = toml::from_str(&text)
        .map_err(|e| CliError::validation(format!("config `{}`: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_inflation(s: &str) -> Result<InflationKind> {
    match s {
        "zero" => Ok(InflationKind::ZeroOnly),
        "one" => Ok(InflationKind::OneOnly),
        "zero_and_one" => Ok(InflationKind::ZeroAndOne),
        other => Err(CliError::validation(format!(
            "inflation must be \"zero\", \"one\", or \"zero_and_one\", got \"{other}\""
        ))),
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let inflation = parse_inflation(&self.model.inflation)?;
        if self.model.tau.is_empty() {
            return Err(CliError::validation("model.tau must list at least one level"));
        }
        for t in &self.model.tau {
            if !(*t > 0.0 && *t < 1.0) {
                return Err(CliError::validation(format!("tau {t} outside (0, 1)")));
            }
        }
        if !inflation.has_zero() && !self.model.zero.terms.is_empty() {
            return Err(CliError::validation(
                "model.zero has terms but the model has no zero inflation",
            ));
        }
        if !inflation.has_one() && !self.model.one.terms.is_empty() {
            return Err(CliError::validation(
                "model.one has terms but the model has no one inflation",
            ));
        }
        for (part, section) in [
            ("zero", &self.model.zero),
            ("one", &self.model.one),
            ("continuous", &self.model.continuous),
        ] {
            let mut labels = Vec::new();
            for term in &section.terms {
                term.validate(part)?;
                let label = term.effective_label();
                if labels.contains(&label) {
                    return Err(CliError::validation(format!(
                        "duplicate term label `{label}` in model.{part}"
                    )));
                }
                labels.push(label);
            }
        }
        for (name, v) in [
            ("run.chains", self.run.chains),
            ("run.draws", self.run.draws),
            ("run.thin", self.run.thin),
        ] {
            if v == 0 {
                return Err(CliError::validation(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

impl TermConfig {
    fn validate(&self, part: &str) -> Result<()> {
        let ctx = |msg: String| CliError::validation(format!("model.{part}: {msg}"));
        let arity_ok = match self.kind {
            TermKind::Linear => !self.columns.is_empty(),
            TermKind::Varying => self.columns.len() == 2,
            _ => self.columns.len() == 1,
        };
        if !arity_ok {
            return Err(ctx(format!(
                "term `{}` has {} column(s); linear needs at least one, varying exactly two, \
                 the rest exactly one",
                self.effective_label(),
                self.columns.len()
            )));
        }
        let spline = matches!(self.kind, TermKind::Pspline | TermKind::Varying);
        if !spline
            && (self.n_basis.is_some() || self.degree.is_some() || self.diff_order.is_some())
        {
            return Err(ctx(format!(
                "term `{}`: n_basis/degree/diff_order apply only to pspline and varying terms",
                self.effective_label()
            )));
        }
        match self.kind {
            TermKind::Mrf => {
                if self.adjacency.is_none() {
                    return Err(ctx(format!(
                        "mrf term `{}` needs an adjacency file",
                        self.effective_label()
                    )));
                }
                if self.levels.is_none() {
                    return Err(ctx(format!(
                        "mrf term `{}` needs a declared `levels` ordering",
                        self.effective_label()
                    )));
                }
            }
            _ => {
                if self.adjacency.is_some() {
                    return Err(ctx(format!(
                        "term `{}`: adjacency applies only to mrf terms",
                        self.effective_label()
                    )));
                }
                if self.levels.is_some() && self.kind != TermKind::RandomIntercept {
                    return Err(ctx(format!(
                        "term `{}`: levels apply only to mrf and random_intercept terms",
                        self.effective_label()
                    )));
                }
            }
        }
        if self.kind == TermKind::Linear && (self.hyper_a.is_some() || self.hyper_b.is_some()) {
            return Err(ctx(format!(
                "linear term `{}` has a flat prior; hyper_a/hyper_b do not apply",
                self.effective_label()
            )));
        }
        let label = self.effective_label();
        if label.is_empty() || label.contains([',', '"', '\n', '\r']) {
            return Err(ctx(format!(
                "label `{label}` must be non-empty and free of commas, quotes, and line breaks"
            )));
        }
        Ok(())
    }

    pub fn effective_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match self.kind {
            TermKind::Linear => format!("lin({})", self.columns.join("+")),
            TermKind::Pspline => format!("f({})", self.columns[0]),
            TermKind::Mrf => format!("mrf({})", self.columns[0]),
            TermKind::RandomIntercept => format!("re({})", self.columns[0]),
            TermKind::Varying => format!("{}:f({})", self.columns[0], self.columns[1]),
        }
    }

    fn pspline_options(&self) -> PsplineOptions {
        let base = PsplineOptions::default();
        PsplineOptions {
            n_basis: self.n_basis.unwrap_or(base.n_basis),
            degree: self.degree.unwrap_or(base.degree),
            diff_order: self.diff_order.unwrap_or(base.diff_order),
            hyper_a: self.hyper_a.unwrap_or(base.hyper_a),
            hyper_b: self.hyper_b.unwrap_or(base.hyper_b),
        }
    }
}

/// How to rebuild one term's covariate input at new data: the column
/// names plus, for factor terms, the level ordering fixed at fit time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermBinding {
    pub kind: TermKind,
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

/// The built model for one quantile level plus everything needed to
/// evaluate it at new covariates.
pub struct BuiltModel {
    pub spec: ModelSpec,
    /// Term bindings per predictor index (0 = zero, 1 = one, 2 = interior).
    pub bindings: [Vec<TermBinding>; 3],
}

/// Resolve a path in the config relative to the config file's directory.
fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn build_term(
    term: &TermConfig,
    data: &Dataset,
    config_dir: &Path,
    warnings: &mut Vec<String>,
) -> Result<(DesignBlock, TermBinding)> {
    let label = term.effective_label();
    let block = match term.kind {
        TermKind::Linear => {
            let mut cols = Array2::<f64>::zeros((data.n_rows(), term.columns.len()));
            for (j, name) in term.columns.iter().enumerate() {
                cols.column_mut(j).assign(&data.numeric(name)?);
            }
            build_linear_term(&label, &cols)?
        }
        TermKind::Pspline => {
            let x = data.numeric(&term.columns[0])?;
            build_pspline_term(&label, &x.view(), &term.pspline_options())?
        }
        TermKind::Varying => {
            let by = data.numeric(&term.columns[0])?;
            let x = data.numeric(&term.columns[1])?;
            build_varying_term(&label, &by.view(), &x.view(), &term.pspline_options())?
        }
        TermKind::Mrf => {
            let levels = term.levels.as_ref().expect("validated");
            let idx = data.factor(&term.columns[0], levels)?;
            let adj_path = resolve(config_dir, term.adjacency.as_ref().expect("validated"));
            let graph = load_adjacency(&adj_path, levels)?;
            build_gmrf_term(
                &label,
                &idx,
                &graph,
                term.hyper_a.unwrap_or(0.01),
                term.hyper_b.unwrap_or(0.01),
                warnings,
            )?
        }
        TermKind::RandomIntercept => {
            let levels = match &term.levels {
                Some(l) => l.clone(),
                None => data.observed_levels(&term.columns[0])?,
            };
            let idx = data.factor(&term.columns[0], &levels)?;
            let (a, b) = RANDOM_INTERCEPT_HYPER;
            let block = build_random_intercept(
                &label,
                &idx,
                levels.len(),
                term.hyper_a.unwrap_or(a),
                term.hyper_b.unwrap_or(b),
            )?;
            return Ok((
                block,
                TermBinding {
                    kind: term.kind,
                    columns: term.columns.clone(),
                    levels: Some(levels),
                },
            ));
        }
    };
    let binding = TermBinding {
        kind: term.kind,
        columns: term.columns.clone(),
        levels: term.levels.clone(),
    };
    Ok((block, binding))
}

/// Build the model at one quantile level from the configuration and data.
pub fn build_model(
    cfg: &FitConfig,
    data: &Dataset,
    config_dir: &Path,
    tau: f64,
    warnings: &mut Vec<String>,
) -> Result<BuiltModel> {
    let inflation = parse_inflation(&cfg.model.inflation)?;
    let mut bindings: [Vec<TermBinding>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut predictors: [Option<PredictorSpec>; 3] = [None, None, None];
    for (pred_id, section) in
        [&cfg.model.zero, &cfg.model.one, &cfg.model.continuous].into_iter().enumerate()
    {
        let active = match pred_id {
            0 => inflation.has_zero(),
            1 => inflation.has_one(),
            _ => true,
        };
        if !active {
            continue;
        }
        let mut blocks = Vec::with_capacity(section.terms.len());
        for term in &section.terms {
            let (block, binding) = build_term(term, data, config_dir, warnings)?;
            blocks.push(block);
            bindings[pred_id].push(binding);
        }
        predictors[pred_id] = Some(PredictorSpec::new(blocks));
    }
    let [d0, d1, c] = predictors;
    let spec = ModelSpec::new(inflation, tau, d0, d1, c.expect("interior predictor always built"));
    Ok(BuiltModel { spec, bindings })
}

/// Parse an adjacency file: one edge per line, "regionA regionB",
/// names resolved against the declared level ordering. Blank lines and
/// lines starting with '#' are ignored.
pub fn load_adjacency(path: &Path, levels: &[String]) -> Result<AdjacencyGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read adjacency file `{}`: {e}", path.display()))
    })?;
    let index_of = |name: &str, line_no: usize| -> Result<usize> {
        levels.iter().position(|l| l == name).ok_or_else(|| {
            CliError::validation(format!(
                "adjacency file `{}`, line {}: region `{}` is not in the declared levels",
                path.display(),
                line_no,
                name
            ))
        })
    };
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(CliError::validation(format!(
                    "adjacency file `{}`, line {}: expected exactly two region names",
                    path.display(),
                    i + 1
                )))
            }
        };
        edges.push((index_of(a, i + 1)?, index_of(b, i + 1)?));
    }
    Ok(AdjacencyGraph::new(levels.len(), &edges)?)
}
