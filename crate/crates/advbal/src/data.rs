//! Shared data model: datasets, estimands, balancing problems, weight
//! vectors, discriminator losses, and the weighted outcome estimator.
//!
//! Weights follow a single convention everywhere: a weight vector over `n`
//! units is nonnegative with mean exactly 1 (sum `n`), and the outcome
//! estimate is `(1/n) Σ wᵢ yᵢ`. Uniform weights therefore reproduce the
//! plain arithmetic mean.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Absolute tolerance on the mean-1 normalization of a [`WeightVector`].
pub const WEIGHT_MEAN_TOL: f64 = 1e-9;

/// Probability clip applied before evaluating the logarithmic loss.
pub const LOG_LOSS_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// A covariate matrix with per-row treatment labels and (possibly missing)
/// outcomes. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    covariates: Array2<f64>,
    treatment: Vec<u32>,
    outcome: Vec<Option<f64>>,
    column_names: Vec<String>,
    treatment_set: BTreeSet<u32>,
}

impl Dataset {
    /// Build a dataset, validating against a declared treatment set.
    pub fn new(
        covariates: Array2<f64>,
        treatment: Vec<u32>,
        outcome: Vec<Option<f64>>,
        column_names: Vec<String>,
        treatment_set: BTreeSet<u32>,
    ) -> Result<Self> {
        let n = covariates.nrows();
        if treatment.len() != n || outcome.len() != n {
            return Err(Error::InvalidInput(format!(
                "row count mismatch: {} covariate rows, {} treatments, {} outcomes",
                n,
                treatment.len(),
                outcome.len()
            )));
        }
        if column_names.len() != covariates.ncols() {
            return Err(Error::InvalidInput(format!(
                "{} column names for {} covariate columns",
                column_names.len(),
                covariates.ncols()
            )));
        }
        if let Some((i, j)) = first_nonfinite(&covariates) {
            return Err(Error::InvalidInput(format!(
                "non-finite covariate at row {i}, column '{}'",
                column_names[j]
            )));
        }
        if let Some(y) = outcome.iter().flatten().find(|y| !y.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite outcome {y}")));
        }
        if let Some(a) = treatment.iter().find(|a| !treatment_set.contains(a)) {
            return Err(Error::InvalidInput(format!(
                "treatment value {a} is not in the declared treatment set {treatment_set:?}"
            )));
        }
        Ok(Dataset {
            covariates,
            treatment,
            outcome,
            column_names,
            treatment_set,
        })
    }

    /// Build a dataset whose treatment set is the set of observed values.
    pub fn from_observed(
        covariates: Array2<f64>,
        treatment: Vec<u32>,
        outcome: Vec<Option<f64>>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let set: BTreeSet<u32> = treatment.iter().copied().collect();
        Dataset::new(covariates, treatment, outcome, column_names, set)
    }

    pub fn n_rows(&self) -> usize {
        self.covariates.nrows()
    }

    pub fn dim(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn covariates(&self) -> &Array2<f64> {
        &self.covariates
    }

    pub fn treatment(&self) -> &[u32] {
        &self.treatment
    }

    pub fn outcome(&self) -> &[Option<f64>] {
        &self.outcome
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn treatment_set(&self) -> &BTreeSet<u32> {
        &self.treatment_set
    }

    /// Row indices of units with treatment `a`.
    pub fn rows_with(&self, a: u32) -> Vec<usize> {
        self.treatment
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == a)
            .map(|(i, _)| i)
            .collect()
    }

    /// Gather the covariate rows at `rows` into a new matrix.
    pub fn covariate_rows(&self, rows: &[usize]) -> Array2<f64> {
        self.covariates.select(Axis(0), rows)
    }

    /// Observed outcomes at `rows`; missing outcomes are an error here
    /// (weights never need outcomes, estimation does).
    pub fn outcomes_at(&self, rows: &[usize]) -> Result<Vec<f64>> {
        rows.iter()
            .map(|&i| {
                self.outcome[i].ok_or_else(|| {
                    Error::InvalidInput(format!("outcome missing for row {i}"))
                })
            })
            .collect()
    }
}

fn first_nonfinite(m: &Array2<f64>) -> Option<(usize, usize)> {
    for (i, row) in m.outer_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Estimand
// ---------------------------------------------------------------------------

/// The population quantity an analysis targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimand {
    /// E[Y^a] over the whole population for one arm.
    ExpectedPotentialOutcome { treatment: u32 },
    /// Average treatment effect over the whole population.
    Ate,
    /// Average treatment effect in the `reference` arm (e.g. the treated).
    Att { reference: u32 },
}

// ---------------------------------------------------------------------------
// BalancingProblem
// ---------------------------------------------------------------------------

/// A (source, target) pair of covariate samples: the source is reweighted
/// until it resembles the target.
#[derive(Debug, Clone)]
pub struct BalancingProblem {
    source: Array2<f64>,
    target: Array2<f64>,
}

impl BalancingProblem {
    pub fn new(source: Array2<f64>, target: Array2<f64>) -> Result<Self> {
        if source.ncols() != target.ncols() {
            return Err(Error::InvalidInput(format!(
                "source has {} columns, target has {}",
                source.ncols(),
                target.ncols()
            )));
        }
        if source.nrows() < 2 || target.nrows() < 2 {
            return Err(Error::DegenerateProblem(format!(
                "need at least 2 rows on each side, got {} source and {} target",
                source.nrows(),
                target.nrows()
            )));
        }
        Ok(BalancingProblem { source, target })
    }

    /// Number of source units `n`.
    pub fn n_source(&self) -> usize {
        self.source.nrows()
    }

    /// Number of target units `n'`.
    pub fn n_target(&self) -> usize {
        self.target.nrows()
    }

    pub fn dim(&self) -> usize {
        self.source.ncols()
    }

    pub fn source(&self) -> &Array2<f64> {
        &self.source
    }

    pub fn target(&self) -> &Array2<f64> {
        &self.target
    }
}

/// Derive the (source, target) pair for an estimand.
///
/// For `ExpectedPotentialOutcome` and per-arm ATE legs the source is the
/// subpopulation with `A = treatment_value` and the target is the full
/// sample. For ATT the target is the reference arm.
pub fn build_balancing_problem(
    ds: &Dataset,
    estimand: &Estimand,
    treatment_value: u32,
) -> Result<BalancingProblem> {
    if !ds.treatment_set().contains(&treatment_value) {
        return Err(Error::InvalidInput(format!(
            "treatment value {treatment_value} not present in the dataset"
        )));
    }
    let source_rows = ds.rows_with(treatment_value);
    if source_rows.len() < 2 {
        return Err(Error::DegenerateProblem(format!(
            "only {} units with treatment {treatment_value}",
            source_rows.len()
        )));
    }
    let source = ds.covariate_rows(&source_rows);
    let target = match estimand {
        Estimand::ExpectedPotentialOutcome { .. } | Estimand::Ate => {
            ds.covariates().clone()
        }
        Estimand::Att { reference } => {
            let observed: BTreeSet<u32> = ds.treatment().iter().copied().collect();
            if observed.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "ATT requires exactly two treatment values present, found {observed:?}"
                )));
            }
            if *reference == treatment_value {
                return Err(Error::InvalidInput(
                    "ATT reference arm must differ from the reweighted arm".into(),
                ));
            }
            let target_rows = ds.rows_with(*reference);
            if target_rows.len() < 2 {
                return Err(Error::DegenerateProblem(format!(
                    "only {} units in the ATT reference arm {reference}",
                    target_rows.len()
                )));
            }
            ds.covariate_rows(&target_rows)
        }
    };
    BalancingProblem::new(source, target)
}

// ---------------------------------------------------------------------------
// WeightVector
// ---------------------------------------------------------------------------

/// Nonnegative per-unit weights with mean exactly 1 (within
/// [`WEIGHT_MEAN_TOL`]); the scaled-simplex representation used by every
/// weighting method in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    /// Validate and wrap a weight vector.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if let Some(w) = values.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!(
                "weights must be finite and nonnegative, got {w}"
            )));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if (mean - 1.0).abs() > WEIGHT_MEAN_TOL {
            return Err(Error::InvalidInput(format!(
                "weight mean {mean} deviates from 1 by more than {WEIGHT_MEAN_TOL}"
            )));
        }
        Ok(WeightVector { values })
    }

    /// Uniform weights over `n` units.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        Ok(WeightVector {
            values: vec![1.0; n],
        })
    }

    /// Rescale a raw nonnegative vector to mean 1.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if let Some(w) = raw.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!(
                "weights must be finite and nonnegative, got {w}"
            )));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidInput(
                "cannot normalize a weight vector with zero sum".into(),
            ));
        }
        let scale = raw.len() as f64 / sum;
        Ok(WeightVector {
            values: raw.into_iter().map(|w| w * scale).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Discriminator loss used by the weight-update step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    ZeroOne,
    Log,
}

impl LossKind {
    pub fn eval(&self, predicted_prob: f64, label: u8) -> Result<f64> {
        match self {
            LossKind::ZeroOne => zero_one_loss(predicted_prob, label),
            LossKind::Log => log_loss(predicted_prob, label),
        }
    }
}

/// Zero-one loss of a probabilistic prediction against a binary label.
///
/// The hard prediction is 1 iff `predicted_prob > 1/2` (strictly, so a
/// probability of exactly 0.5 predicts class 0).
pub fn zero_one_loss(predicted_prob: f64, label: u8) -> Result<f64> {
    if !predicted_prob.is_finite() || !(0.0..=1.0).contains(&predicted_prob) {
        return Err(Error::InvalidInput(format!(
            "predicted probability {predicted_prob} outside [0, 1]"
        )));
    }
    if label > 1 {
        return Err(Error::InvalidInput(format!("label {label} not in {{0, 1}}")));
    }
    let hard: u8 = (predicted_prob > 0.5).into();
    Ok(if hard != label { 1.0 } else { 0.0 })
}

/// Nonnegative logarithmic loss, with the probability clipped to
/// `[LOG_LOSS_EPS, 1 - LOG_LOSS_EPS]` before evaluation.
pub fn log_loss(predicted_prob: f64, label: u8) -> Result<f64> {
    if !predicted_prob.is_finite() {
        return Err(Error::InvalidInput(format!(
            "predicted probability {predicted_prob} is not finite"
        )));
    }
    if label > 1 {
        return Err(Error::InvalidInput(format!("label {label} not in {{0, 1}}")));
    }
    let p = predicted_prob.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
    Ok(if label == 1 { -p.ln() } else { -(1.0 - p).ln() })
}

/// Weighted mean of outcomes under mean-1 weights: `(1/n) Σ wᵢ yᵢ`.
pub fn weighted_outcome_estimate(w: &WeightVector, y: &[f64]) -> Result<f64> {
    if w.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} outcomes",
            w.len(),
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite outcome {v}")));
    }
    let dot: f64 = w.iter().zip(y).map(|(wi, yi)| wi * yi).sum();
    Ok(dot / w.len() as f64)
}

// ---------------------------------------------------------------------------
// CSV ingestion and emission
// ---------------------------------------------------------------------------

/// Maps CSV header names to dataset roles.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CsvSchema {
    pub treatment_column: String,
    pub outcome_column: String,
    pub covariate_columns: Vec<String>,
}

/// Load a dataset from a headed CSV file. Covariate cells must be finite
/// reals; an empty outcome cell marks a missing outcome; anything else is a
/// parse error carrying the cell coordinates.
pub fn load_dataset_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found in {path:?}")))
    };
    let treat_idx = col_index(&schema.treatment_column)?;
    let outcome_idx = col_index(&schema.outcome_column)?;
    let cov_idx: Vec<usize> = schema
        .covariate_columns
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_>>()?;

    let d = cov_idx.len();
    let mut covariates: Vec<f64> = Vec::new();
    let mut treatment: Vec<u32> = Vec::new();
    let mut outcome: Vec<Option<f64>> = Vec::new();

    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record = record?;
        for (&idx, name) in cov_idx.iter().zip(&schema.covariate_columns) {
            let cell = record.get(idx).unwrap_or("");
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                column: name.clone(),
                message: format!("'{cell}' is not a real number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: name.clone(),
                    message: format!("covariate value '{cell}' is not finite"),
                });
            }
            covariates.push(value);
        }
        let cell = record.get(treat_idx).unwrap_or("");
        let a: u32 = cell.trim().parse().map_err(|_| Error::Parse {
            row,
            column: schema.treatment_column.clone(),
            message: format!("'{cell}' is not a treatment label"),
        })?;
        treatment.push(a);
        let cell = record.get(outcome_idx).unwrap_or("").trim();
        if cell.is_empty() {
            outcome.push(None);
        } else {
            let y: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: schema.outcome_column.clone(),
                message: format!("'{cell}' is not a real number"),
            })?;
            if !y.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: schema.outcome_column.clone(),
                    message: format!("outcome value '{cell}' is not finite"),
                });
            }
            outcome.push(Some(y));
        }
    }

    let n = treatment.len();
    let covariates = Array2::from_shape_vec((n, d), covariates)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Dataset::from_observed(
        covariates,
        treatment,
        outcome,
        schema.covariate_columns.clone(),
    )
}

/// Write a dataset as CSV with covariate columns first, then the treatment
/// and outcome columns. Missing outcomes become empty cells.
pub fn write_dataset_csv(
    path: &Path,
    ds: &Dataset,
    treatment_column: &str,
    outcome_column: &str,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = ds.column_names().to_vec();
    header.push(treatment_column.to_string());
    header.push(outcome_column.to_string());
    writer.write_record(&header)?;
    for i in 0..ds.n_rows() {
        let mut record: Vec<String> = ds
            .covariates()
            .row(i)
            .iter()
            .map(|v| format_cell(*v))
            .collect();
        record.push(ds.treatment()[i].to_string());
        record.push(match ds.outcome()[i] {
            Some(y) => format_cell(y),
            None => String::new(),
        });
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest round-trip decimal representation; keeps emitted files
/// byte-stable across runs.
pub fn format_cell(v: f64) -> String {
    format!("{v}")
}
