//! Config-driven experiment runner: generate replications, run each
//! weighting method, aggregate bias/RMSE with bootstrap confidence
//! intervals, and emit result tables.
//!
//! Replications run concurrently on a bounded worker pool; per-replication
//! seeds are `base_seed + r`, and every derived seed is a pure function of
//! the configuration, so output files are byte-identical across reruns and
//! across serial vs concurrent execution.

mod config;

pub use config::{
    family_from_name, BenchmarkConfig, EstimandConfig, ExperimentConfig, FamilyConfig,
    MethodConfig, OutputConfig, OutputFormat,
};

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::adversarial::{adversarial_balance, AdversarialParams, FamilyChoice, PredictionMode};
use crate::baselines::{ipw_weights, mmd_weights, MMD_DEFAULT_RIDGE, MMD_DEFAULT_SCALE};
use crate::classifiers::{cross_val_select, FamilySpec};
use crate::data::{
    build_balancing_problem, format_cell, load_dataset_csv, weighted_outcome_estimate,
    Dataset, Estimand, WeightVector,
};
use crate::diagnostics::{effective_sample_size, h_divergence, DiscriminatorFamily};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, RngStream};

/// Environment variable overriding the default worker-pool size.
pub const WORKERS_ENV_VAR: &str = "ADVBAL_WORKERS";

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Aggregated results for one (method, n) cell.
#[derive(Debug, Clone)]
pub struct MethodRow {
    pub method: String,
    pub n: usize,
    /// Per-replication estimates in replication order; failures are None.
    pub estimates: Vec<Option<f64>>,
    /// (replication index, error message) for each failure.
    pub failures: Vec<(usize, String)>,
    pub bias: Option<f64>,
    pub rmse: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub mean_h_divergence: Option<f64>,
    pub mean_ess: Option<f64>,
    /// More than half the replications failed.
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub truth: Option<f64>,
    pub rows: Vec<MethodRow>,
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

/// Percentile bootstrap interval for the mean of `values`: resample with
/// replacement `b` times, take the mean of each resample, and return the
/// `(1-level)/2` and `1-(1-level)/2` empirical quantiles. Deterministic
/// given `seed`.
pub fn bootstrap_ci(values: &[f64], b: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "bootstrap needs at least 2 values, got {}",
            values.len()
        )));
    }
    if b == 0 {
        return Err(Error::InvalidInput("bootstrap needs b >= 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let n = values.len();
    let mut rng = RngStream::new(seed);
    let mut means = Vec::with_capacity(b);
    for _ in 0..b {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[rng.index(n)];
        }
        means.push(sum / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let quantile = |p: f64| -> f64 {
        let pos = p * (b - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        means[lo] * (1.0 - frac) + means[hi] * frac
    };
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile(alpha), quantile(1.0 - alpha)))
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct BenchContext {
    estimand: Estimand,
    /// Arms to balance toward the target; ATE runs one balancing problem
    /// per arm and differences the two weighted means.
    arms: Vec<u32>,
    truth: Option<f64>,
    /// Set for the csv benchmark: every replication reuses this dataset.
    fixed_data: Option<Arc<Dataset>>,
}

fn bench_context(cfg: &ExperimentConfig) -> Result<BenchContext> {
    match &cfg.benchmark {
        BenchmarkConfig::KangSchafer { .. } => Ok(BenchContext {
            estimand: Estimand::ExpectedPotentialOutcome { treatment: 1 },
            arms: vec![1],
            truth: Some(210.0),
            fixed_data: None,
        }),
        BenchmarkConfig::Circular => Ok(BenchContext {
            estimand: Estimand::Ate,
            arms: vec![1, 0],
            truth: Some(0.0),
            fixed_data: None,
        }),
        BenchmarkConfig::Csv {
            path,
            schema,
            estimand,
            truth,
        } => {
            let ds = load_dataset_csv(Path::new(path), schema)?;
            let arms = match estimand {
                EstimandConfig::ExpectedPotentialOutcome { treatment } => vec![*treatment],
                EstimandConfig::Ate => vec![1, 0],
                EstimandConfig::Att { source, .. } => vec![*source],
            };
            Ok(BenchContext {
                estimand: estimand.to_estimand(),
                arms,
                truth: *truth,
                fixed_data: Some(Arc::new(ds)),
            })
        }
    }
}

fn resolve_workers(requested: Option<usize>) -> usize {
    requested
        .or_else(|| {
            std::env::var(WORKERS_ENV_VAR)
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .max(1)
}

struct RepOutcome {
    estimate: f64,
    h_divergence: f64,
    ess: f64,
}

/// Weights for one arm of one method, plus the family used for diagnostics.
fn arm_weights(
    method: &MethodConfig,
    method_idx: usize,
    ds: &Dataset,
    estimand: &Estimand,
    arm: u32,
    prob: &crate::data::BalancingProblem,
    ds_seed: u64,
) -> Result<(WeightVector, FamilySpec)> {
    match method {
        MethodConfig::Unweighted => Ok((
            WeightVector::uniform(prob.n_source())?,
            FamilySpec::logistic_regression(),
        )),
        MethodConfig::MmdV1 => {
            let res = mmd_weights(prob, MMD_DEFAULT_SCALE, MMD_DEFAULT_RIDGE)?;
            Ok((res.weights, FamilySpec::logistic_regression()))
        }
        MethodConfig::Ipw { family } => {
            let arm_estimand = match estimand {
                Estimand::Att { reference } => Estimand::Att {
                    reference: *reference,
                },
                _ => Estimand::ExpectedPotentialOutcome { treatment: arm },
            };
            let seed = mix_seed(ds_seed, 0x1B0 + method_idx as u64);
            let spec = resolve_ipw_family(family, ds, &arm_estimand, arm, seed)?;
            let res = ipw_weights(ds, &spec, &arm_estimand, arm, seed)?;
            Ok((res.weights, spec))
        }
        MethodConfig::Adversarial { family } => {
            let mut params = AdversarialParams::new(FamilySpec::logistic_regression());
            params.family = match family {
                FamilyConfig::Named(name) => FamilyChoice::Fixed(family_from_name(name)?),
                FamilyConfig::CvSelect { cv_select } => FamilyChoice::CvSelect(
                    cv_select
                        .iter()
                        .map(|n| family_from_name(n))
                        .collect::<Result<_>>()?,
                ),
            };
            params.seed = mix_seed(ds_seed, 0xAD0 + method_idx as u64 * 4 + arm as u64);
            let (weights, trace) = adversarial_balance(prob, &params)?;
            let diag_family = match (&params.family, &trace.selection) {
                (FamilyChoice::Fixed(spec), _) => spec.clone(),
                (_, Some(sel)) => sel.spec.clone(),
                _ => FamilySpec::logistic_regression(),
            };
            Ok((weights, diag_family))
        }
    }
}

/// For IPW the family selection (when requested) happens on the propensity
/// task itself: predict the modeled arm from the covariates.
fn resolve_ipw_family(
    family: &FamilyConfig,
    ds: &Dataset,
    estimand: &Estimand,
    arm: u32,
    seed: u64,
) -> Result<FamilySpec> {
    match family {
        FamilyConfig::Named(name) => family_from_name(name),
        FamilyConfig::CvSelect { cv_select } => {
            let candidates: Vec<FamilySpec> = cv_select
                .iter()
                .map(|n| family_from_name(n))
                .collect::<Result<_>>()?;
            let modeled = match estimand {
                Estimand::Att { reference } => *reference,
                _ => arm,
            };
            let labels: Vec<u8> = ds
                .treatment()
                .iter()
                .map(|&a| (a == modeled) as u8)
                .collect();
            let uniform = vec![1.0; ds.n_rows()];
            let sel = cross_val_select(
                &candidates,
                ds.covariates(),
                &labels,
                &uniform,
                5,
                mix_seed(seed, 0xC5),
            )?;
            Ok(sel.spec)
        }
    }
}

fn run_method_on_dataset(
    method: &MethodConfig,
    method_idx: usize,
    ds: &Dataset,
    ctx: &BenchContext,
    ds_seed: u64,
) -> Result<RepOutcome> {
    let mut arm_estimates = Vec::with_capacity(ctx.arms.len());
    let mut h_divs = Vec::with_capacity(ctx.arms.len());
    let mut esses = Vec::with_capacity(ctx.arms.len());

    for (arm_pos, &arm) in ctx.arms.iter().enumerate() {
        let prob = build_balancing_problem(ds, &ctx.estimand, arm)?;
        let (weights, diag_family) =
            arm_weights(method, method_idx, ds, &ctx.estimand, arm, &prob, ds_seed)?;
        let source_rows = ds.rows_with(arm);
        let outcomes = ds.outcomes_at(&source_rows)?;
        arm_estimates.push(weighted_outcome_estimate(&weights, &outcomes)?);
        let h = h_divergence(
            &prob,
            &weights,
            &DiscriminatorFamily::Fitted(diag_family),
            PredictionMode::TrainPredictions,
            mix_seed(ds_seed, 0xD1A + method_idx as u64 * 4 + arm_pos as u64),
        )?;
        h_divs.push(h);
        esses.push(effective_sample_size(&weights));
    }

    let estimate = match ctx.estimand {
        Estimand::ExpectedPotentialOutcome { .. } => arm_estimates[0],
        Estimand::Ate => arm_estimates[0] - arm_estimates[1],
        Estimand::Att { reference } => {
            let target_rows = ds.rows_with(reference);
            let target_outcomes = ds.outcomes_at(&target_rows)?;
            let target_mean =
                target_outcomes.iter().sum::<f64>() / target_outcomes.len() as f64;
            target_mean - arm_estimates[0]
        }
    };
    Ok(RepOutcome {
        estimate,
        h_divergence: h_divs.iter().sum::<f64>() / h_divs.len() as f64,
        ess: esses.iter().sum::<f64>() / esses.len() as f64,
    })
}

type RepResults = Vec<std::result::Result<RepOutcome, String>>;

fn run_replication(
    cfg: &ExperimentConfig,
    ctx: &BenchContext,
    n: usize,
    r: usize,
) -> RepResults {
    let ds_seed = cfg.seed.wrapping_add(r as u64);
    let dataset: std::result::Result<Arc<Dataset>, String> = match (&cfg.benchmark, &ctx.fixed_data)
    {
        (_, Some(ds)) => Ok(ds.clone()),
        (BenchmarkConfig::KangSchafer { transformed }, _) => {
            crate::benchgen::gen_kang_schafer(n, ds_seed, *transformed)
                .map(|g| Arc::new(g.dataset))
                .map_err(|e| e.to_string())
        }
        (BenchmarkConfig::Circular, _) => crate::benchgen::gen_circular(n, ds_seed)
            .map(|g| Arc::new(g.dataset))
            .map_err(|e| e.to_string()),
        (BenchmarkConfig::Csv { .. }, _) => unreachable!("csv data is preloaded"),
    };
    match dataset {
        Err(e) => cfg.methods.iter().map(|_| Err(e.clone())).collect(),
        Ok(ds) => cfg
            .methods
            .iter()
            .enumerate()
            .map(|(m_idx, method)| {
                run_method_on_dataset(method, m_idx, &ds, ctx, ds_seed)
                    .map_err(|e| e.to_string())
            })
            .collect(),
    }
}

fn aggregate_rows(
    cfg: &ExperimentConfig,
    ctx: &BenchContext,
    n: usize,
    per_rep: &[RepResults],
) -> Vec<MethodRow> {
    cfg.methods
        .iter()
        .enumerate()
        .map(|(m_idx, method)| {
            let mut estimates = Vec::with_capacity(per_rep.len());
            let mut failures = Vec::new();
            let mut successes = Vec::new();
            let mut h_sum = 0.0;
            let mut ess_sum = 0.0;
            for (r, rep) in per_rep.iter().enumerate() {
                match &rep[m_idx] {
                    Ok(out) => {
                        estimates.push(Some(out.estimate));
                        successes.push(out.estimate);
                        h_sum += out.h_divergence;
                        ess_sum += out.ess;
                    }
                    Err(msg) => {
                        estimates.push(None);
                        failures.push((r, msg.clone()));
                    }
                }
            }
            let n_success = successes.len();
            let failed = failures.len() * 2 > per_rep.len();
            let centered: Vec<f64> = match ctx.truth {
                Some(t) => successes.iter().map(|e| e - t).collect(),
                None => successes.clone(),
            };
            let (bias, rmse) = if ctx.truth.is_some() && n_success > 0 {
                let b = centered.iter().sum::<f64>() / n_success as f64;
                let ms = centered.iter().map(|e| e * e).sum::<f64>() / n_success as f64;
                (Some(b), Some(ms.sqrt()))
            } else {
                (None, None)
            };
            let ci = match n_success {
                0 => None,
                1 => Some((centered[0], centered[0])),
                _ => bootstrap_ci(
                    &centered,
                    cfg.bootstrap_samples,
                    0.95,
                    mix_seed(mix_seed(cfg.seed, 0xB007 + m_idx as u64), n as u64),
                )
                .ok(),
            };
            MethodRow {
                method: method.label(),
                n,
                estimates,
                failures,
                bias,
                rmse,
                ci_lo: ci.map(|c| c.0),
                ci_hi: ci.map(|c| c.1),
                mean_h_divergence: (n_success > 0).then(|| h_sum / n_success as f64),
                mean_ess: (n_success > 0).then(|| ess_sum / n_success as f64),
                failed,
            }
        })
        .collect()
}

/// Run the full experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let ctx = bench_context(cfg)?;
    let workers = resolve_workers(cfg.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;

    let mut sizes: Vec<usize> = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();

    // per size: per replication (ordered by r): per method
    let mut by_size: Vec<(usize, Vec<RepResults>)> = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let effective_n = match &ctx.fixed_data {
            Some(ds) => ds.n_rows(),
            None => n,
        };
        let per_rep: Vec<RepResults> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| run_replication(cfg, &ctx, n, r))
                .collect()
        });
        by_size.push((effective_n, per_rep));
    }

    // rows ordered by method (config order), then n ascending
    let mut rows = Vec::new();
    let mut grouped: Vec<Vec<MethodRow>> = Vec::new();
    for (n, per_rep) in &by_size {
        grouped.push(aggregate_rows(cfg, &ctx, *n, per_rep));
    }
    for m_idx in 0..cfg.methods.len() {
        for size_rows in &grouped {
            rows.push(size_rows[m_idx].clone());
        }
    }
    Ok(ExperimentResult {
        truth: ctx.truth,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

fn opt_cell(v: Option<f64>) -> String {
    v.map(format_cell).unwrap_or_default()
}

/// Render the aggregate table as CSV with the fixed column set.
pub fn render_results_csv(res: &ExperimentResult) -> String {
    let mut out = String::from(
        "method,n,bias,rmse,ci_lo,ci_hi,mean_h_divergence,mean_ess,n_failures\n",
    );
    for row in &res.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.method,
            row.n,
            opt_cell(row.bias),
            opt_cell(row.rmse),
            opt_cell(row.ci_lo),
            opt_cell(row.ci_hi),
            opt_cell(row.mean_h_divergence),
            opt_cell(row.mean_ess),
            row.failures.len(),
        ));
    }
    out
}

#[derive(Serialize)]
struct EmitRow<'a> {
    method: &'a str,
    n: usize,
    bias: Option<f64>,
    rmse: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
    mean_h_divergence: Option<f64>,
    mean_ess: Option<f64>,
    n_failures: usize,
}

/// Render the aggregate table as JSON, mirroring the CSV field names.
pub fn render_results_json(res: &ExperimentResult) -> Result<String> {
    let rows: Vec<EmitRow> = res
        .rows
        .iter()
        .map(|r| EmitRow {
            method: &r.method,
            n: r.n,
            bias: r.bias,
            rmse: r.rmse,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            mean_h_divergence: r.mean_h_divergence,
            mean_ess: r.mean_ess,
            n_failures: r.failures.len(),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Write the result table to `path` in the requested format.
pub fn emit_results(res: &ExperimentResult, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => render_results_csv(res),
        OutputFormat::Json => render_results_json(res)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
