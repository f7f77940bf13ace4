//! Experiment configuration: one flat JSON document.

use serde::{Deserialize, Serialize};

use crate::classifiers::FamilySpec;
use crate::data::{CsvSchema, Estimand};
use crate::error::{Error, Result};

/// Which data the experiment runs on.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkConfig {
    KangSchafer {
        #[serde(default)]
        transformed: bool,
    },
    Circular,
    /// External data: replications reuse the same file, with method-level
    /// randomness varying by replication. Bias and RMSE are reported only
    /// when `truth` is given.
    Csv {
        path: String,
        schema: CsvSchema,
        estimand: EstimandConfig,
        #[serde(default)]
        truth: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimandConfig {
    ExpectedPotentialOutcome { treatment: u32 },
    Ate,
    Att { source: u32, reference: u32 },
}

impl EstimandConfig {
    pub fn to_estimand(self) -> Estimand {
        match self {
            EstimandConfig::ExpectedPotentialOutcome { treatment } => {
                Estimand::ExpectedPotentialOutcome { treatment }
            }
            EstimandConfig::Ate => Estimand::Ate,
            EstimandConfig::Att { reference, .. } => Estimand::Att { reference },
        }
    }
}

/// Classifier family in configuration form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyConfig {
    /// "lr", "rbf", "mlp1", "mlp2" or "mlp3".
    Named(String),
    /// One-shot cross-validated selection among named families.
    CvSelect { cv_select: Vec<String> },
}

pub fn family_from_name(name: &str) -> Result<FamilySpec> {
    match name {
        "lr" => Ok(FamilySpec::logistic_regression()),
        "rbf" => Ok(FamilySpec::kernel_rbf()),
        "mlp1" => Ok(FamilySpec::mlp(1)),
        "mlp2" => Ok(FamilySpec::mlp(2)),
        "mlp3" => Ok(FamilySpec::mlp(3)),
        other => Err(Error::Config(format!(
            "unknown family '{other}' (expected lr, rbf, mlp1, mlp2 or mlp3)"
        ))),
    }
}

impl FamilyConfig {
    pub fn label(&self) -> String {
        match self {
            FamilyConfig::Named(n) => n.clone(),
            FamilyConfig::CvSelect { cv_select } => format!("cv:{}", cv_select.join("+")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilyConfig::Named(n) => family_from_name(n).map(|_| ()),
            FamilyConfig::CvSelect { cv_select } => {
                if cv_select.is_empty() {
                    return Err(Error::Config("cv_select list is empty".into()));
                }
                for n in cv_select {
                    family_from_name(n)?;
                }
                Ok(())
            }
        }
    }
}

/// One weighting method to evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    Unweighted,
    Ipw { family: FamilyConfig },
    MmdV1,
    Adversarial { family: FamilyConfig },
}

impl MethodConfig {
    pub fn label(&self) -> String {
        match self {
            MethodConfig::Unweighted => "unweighted".into(),
            MethodConfig::Ipw { family } => format!("ipw({})", family.label()),
            MethodConfig::MmdV1 => "mmd_v1".into(),
            MethodConfig::Adversarial { family } => {
                format!("adversarial({})", family.label())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    pub path: String,
    pub format: OutputFormat,
}

fn default_replications() -> usize {
    100
}

fn default_bootstrap() -> usize {
    1000
}

/// Full experiment description. CLI flags mirror these field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkConfig,
    pub sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub methods: Vec<MethodConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_samples: usize,
    /// Worker-pool size; defaults to the ADVBAL_WORKERS environment
    /// variable, then to available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must be nonempty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.bootstrap_samples == 0 {
            return Err(Error::Config("bootstrap_samples must be at least 1".into()));
        }
        match &self.benchmark {
            BenchmarkConfig::Csv { schema, .. } => {
                if schema.covariate_columns.is_empty() {
                    return Err(Error::Config("csv schema has no covariate columns".into()));
                }
            }
            _ => {
                for &n in &self.sizes {
                    if n < 10 {
                        return Err(Error::Config(format!(
                            "benchmark size {n} is below the generator minimum of 10"
                        )));
                    }
                }
            }
        }
        for m in &self.methods {
            match m {
                MethodConfig::Ipw { family } | MethodConfig::Adversarial { family } => {
                    family.validate()?
                }
                _ => {}
            }
        }
        Ok(())
    }
}
