//! Deterministic, seeded generators for the simulated benchmarks and their
//! analytic ground truth.
//!
//! Both generators retain their latent variables (untransformed covariates,
//! unobserved or counterfactual outcomes, true propensities) in a side
//! table that is never exposed to the weighting algorithms; it exists so
//! per-replication bias can be computed exactly and so the construction can
//! be verified bit for bit.

use std::path::Path;

use ndarray::Array2;

use crate::data::{format_cell, Dataset, Estimand};
use crate::error::{Error, Result};
pub use crate::rng::RngStream;

/// Benchmark sizes used throughout the experiments; arbitrary n >= 10 works
/// too.
pub const PRESET_SIZES: [usize; 5] = [200, 500, 1000, 2000, 5000];

/// Logistic function.
pub fn expit(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Ground truth for a named benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTruth {
    pub name: String,
    pub true_value: f64,
    pub estimand: Estimand,
}

/// Analytic truth: the Kang-Schafer outcome is 210 plus zero-mean terms, so
/// E[Y under treatment 1] = 210; the circular effect E[X1/2 + X2/2] vanishes
/// for uniform covariates, so the ATE is 0.
pub fn true_values(benchmark_name: &str) -> Result<BenchmarkTruth> {
    match benchmark_name {
        "kang_schafer" => Ok(BenchmarkTruth {
            name: benchmark_name.into(),
            true_value: 210.0,
            estimand: Estimand::ExpectedPotentialOutcome { treatment: 1 },
        }),
        "circular" => Ok(BenchmarkTruth {
            name: benchmark_name.into(),
            true_value: 0.0,
            estimand: Estimand::Ate,
        }),
        other => Err(Error::InvalidInput(format!(
            "unknown benchmark '{other}' (expected kang_schafer or circular)"
        ))),
    }
}

/// Latent columns kept alongside a generated dataset, for oracle use only.
#[derive(Debug, Clone)]
pub struct OracleTable {
    pub columns: Vec<(String, Vec<f64>)>,
}

impl OracleTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// A generated dataset together with its hidden oracle columns.
#[derive(Debug, Clone)]
pub struct GeneratedBenchmark {
    pub dataset: Dataset,
    pub oracle: OracleTable,
}

fn check_size(n: usize) -> Result<()> {
    if n < 10 {
        return Err(Error::InvalidInput(format!(
            "benchmark size must be at least 10, got {n}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Kang-Schafer
// ---------------------------------------------------------------------------

/// Kang & Schafer (2007) style simulation: four standard-normal covariates,
/// outcome `210 + 27.4 X1 + 13.7 X2 + 13.7 X3 + 13.7 X4 + eps`, logistic
/// propensity `expit(-X1 + 0.5 X2 - 0.25 X3 - 0.1 X4)`, and the outcome
/// observed only for treated units.
///
/// With `transformed = true` the emitted covariates are the nonlinear
/// transforms `exp(X1/2)`, `X2/(1+exp(X1)) + 10`, `(X1 X3/25 + 0.6)³`,
/// `(X2 + X4 + 20)²` of the same latent draws, so the pair of scenarios at
/// equal `(n, seed)` shares treatments and outcomes exactly.
pub fn gen_kang_schafer(n: usize, seed: u64, transformed: bool) -> Result<GeneratedBenchmark> {
    check_size(n)?;
    let mut rng = RngStream::new(seed);
    let mut covariates = Array2::zeros((n, 4));
    let mut treatment = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    let mut latent = vec![Vec::with_capacity(n); 4];
    let mut y_all = Vec::with_capacity(n);
    let mut propensity = Vec::with_capacity(n);

    for i in 0..n {
        let x1 = rng.normal();
        let x2 = rng.normal();
        let x3 = rng.normal();
        let x4 = rng.normal();
        let eps = rng.normal();
        let p = expit(-x1 + 0.5 * x2 - 0.25 * x3 - 0.1 * x4);
        let a = rng.bernoulli(p) as u32;
        let y = 210.0 + 27.4 * x1 + 13.7 * (x2 + x3 + x4) + eps;

        let row = if transformed {
            [
                (x1 / 2.0).exp(),
                x2 / (1.0 + x1.exp()) + 10.0,
                (x1 * x3 / 25.0 + 0.6).powi(3),
                (x2 + x4 + 20.0) * (x2 + x4 + 20.0),
            ]
        } else {
            [x1, x2, x3, x4]
        };
        for (j, v) in row.into_iter().enumerate() {
            covariates[[i, j]] = v;
        }
        treatment.push(a);
        outcome.push(if a == 1 { Some(y) } else { None });
        latent[0].push(x1);
        latent[1].push(x2);
        latent[2].push(x3);
        latent[3].push(x4);
        y_all.push(y);
        propensity.push(p);
    }

    let names = vec!["x1".into(), "x2".into(), "x3".into(), "x4".into()];
    let dataset = Dataset::new(
        covariates,
        treatment,
        outcome,
        names,
        [0u32, 1u32].into_iter().collect(),
    )?;
    let oracle = OracleTable {
        columns: vec![
            ("latent_x1".into(), latent[0].clone()),
            ("latent_x2".into(), latent[1].clone()),
            ("latent_x3".into(), latent[2].clone()),
            ("latent_x4".into(), latent[3].clone()),
            ("y_all".into(), y_all),
            ("propensity".into(), propensity),
        ],
    };
    Ok(GeneratedBenchmark { dataset, oracle })
}

// ---------------------------------------------------------------------------
// Circular
// ---------------------------------------------------------------------------

/// Radially confounded two-covariate simulation: `X1, X2 ~ U[-1, 1]`,
/// propensity `0.95 / (1 + (3/sqrt(2)) ||X||)`, potential outcomes normal
/// with means `||X||² - X1/2 - X2/2` and `||X||²` and standard deviation
/// `sqrt(3)`. The emitted outcome is the factual one; both potential
/// outcomes live in the oracle table.
pub fn gen_circular(n: usize, seed: u64) -> Result<GeneratedBenchmark> {
    check_size(n)?;
    let mut rng = RngStream::new(seed);
    let mut covariates = Array2::zeros((n, 2));
    let mut treatment = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    let mut y0_col = Vec::with_capacity(n);
    let mut y1_col = Vec::with_capacity(n);
    let mut propensity = Vec::with_capacity(n);
    let sd = 3.0f64.sqrt();
    let slope = 3.0 / 2.0f64.sqrt();

    for i in 0..n {
        let x1 = rng.uniform_in(-1.0, 1.0);
        let x2 = rng.uniform_in(-1.0, 1.0);
        let r = (x1 * x1 + x2 * x2).sqrt();
        let p = 0.95 / (1.0 + slope * r);
        let a = rng.bernoulli(p) as u32;
        let sq = x1 * x1 + x2 * x2;
        let y0 = sq - x1 / 2.0 - x2 / 2.0 + sd * rng.normal();
        let y1 = sq + sd * rng.normal();

        covariates[[i, 0]] = x1;
        covariates[[i, 1]] = x2;
        treatment.push(a);
        outcome.push(Some(if a == 1 { y1 } else { y0 }));
        y0_col.push(y0);
        y1_col.push(y1);
        propensity.push(p);
    }

    let dataset = Dataset::new(
        covariates,
        treatment,
        outcome,
        vec!["x1".into(), "x2".into()],
        [0u32, 1u32].into_iter().collect(),
    )?;
    let oracle = OracleTable {
        columns: vec![
            ("y0".into(), y0_col),
            ("y1".into(), y1_col),
            ("propensity".into(), propensity),
        ],
    };
    Ok(GeneratedBenchmark { dataset, oracle })
}

// ---------------------------------------------------------------------------
// Oracle CSV
// ---------------------------------------------------------------------------

/// Write the oracle side table as CSV (conventionally to a sibling file with
/// suffix `.oracle.csv`).
pub fn write_oracle_csv(path: &Path, oracle: &OracleTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let header: Vec<&str> = oracle.columns.iter().map(|(n, _)| n.as_str()).collect();
    writer.write_record(&header)?;
    let rows = oracle.columns.first().map(|(_, v)| v.len()).unwrap_or(0);
    for i in 0..rows {
        let record: Vec<String> = oracle
            .columns
            .iter()
            .map(|(_, v)| format_cell(v[i]))
            .collect();
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
