//! CSV data ingestion. Columns are kept as raw strings and interpreted
//! on demand: numeric for covariates and the response, factor (matched
//! against a level ordering) for region and group terms. Errors carry
//! row and column context.

use crate::error::{CliError, Result};
use ndarray::Array1;
use std::path::Path;

pub struct Dataset {
    headers: Vec<String>,
    /// Column-major raw fields; `columns[j][i]` is row i of column j.
    columns: Vec<Vec<String>>,
}

impl Dataset {
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::validation(format!("cannot open `{}`: {e}", path.display())))?;
        let headers: Vec<String> =
            reader.headers()?.iter().map(|h| h.to_string()).collect();
        let mut columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(CliError::validation(format!(
                    "`{}` row {}: {} fields, header has {}",
                    path.display(),
                    i + 1,
                    record.len(),
                    headers.len()
                )));
            }
            for (j, field) in record.iter().enumerate() {
                columns[j].push(field.to_string());
            }
        }
        if columns.first().is_none_or(|c| c.is_empty()) {
            return Err(CliError::validation(format!(
                "`{}` contains no data rows",
                path.display()
            )));
        }
        Ok(Self { headers, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    fn column(&self, name: &str) -> Result<&[String]> {
        let j = self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::validation(format!(
                "column `{name}` not found; available: {}",
                self.headers.join(", ")
            ))
        })?;
        Ok(&self.columns[j])
    }

    /// Parse a column as floating point numbers.
    pub fn numeric(&self, name: &str) -> Result<Array1<f64>> {
        let raw = self.column(name)?;
        let mut out = Array1::zeros(raw.len());
        for (i, field) in raw.iter().enumerate() {
            out[i] = field.parse::<f64>().map_err(|_| {
                CliError::validation(format!(
                    "column `{name}`, row {}: `{field}` is not a number",
                    i + 1
                ))
            })?;
        }
        Ok(out)
    }

    /// Map a column onto indices into a declared level ordering.
    pub fn factor(&self, name: &str, levels: &[String]) -> Result<Vec<usize>> {
        let raw = self.column(name)?;
        raw.iter()
            .enumerate()
            .map(|(i, field)| {
                levels.iter().position(|l| l == field).ok_or_else(|| {
                    CliError::validation(format!(
                        "column `{name}`, row {}: level `{field}` is not in the declared levels",
                        i + 1
                    ))
                })
            })
            .collect()
    }

    /// Distinct values of a column in order of first appearance.
    pub fn observed_levels(&self, name: &str) -> Result<Vec<String>> {
        let raw = self.column(name)?;
        let mut levels = Vec::new();
        for field in raw {
            if !levels.contains(field) {
                levels.push(field.clone());
            }
        }
        Ok(levels)
    }
}
