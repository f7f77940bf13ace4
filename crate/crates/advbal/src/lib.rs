//! Covariate-balancing weights for causal effect estimation.
//!
//! The centerpiece is an adversarial reweighting algorithm: a binary
//! discriminator is repeatedly trained to tell a weighted source sample
//! (label 0) from a target sample (label 1), and the source weights are
//! pushed by exponentiated-gradient steps to maximize the discriminator's
//! error. At the end of the game the weighted source is indistinguishable
//! from the target as far as the chosen classifier family can tell, and the
//! weights can be used for weighted outcome estimation.
//!
//! The crate also ships:
//!
//! - plug-in discriminators (logistic regression, RBF-kernel logistic
//!   regression, small MLPs) with weighted training and 5-fold
//!   cross-validated family selection ([`classifiers`]),
//! - inverse propensity weighting and kernel-MMD weight baselines
//!   ([`baselines`]),
//! - balance diagnostics: classifier two-sample divergence, standardized
//!   mean differences, weight variability, effective sample size, and an
//!   estimation-error bound ([`diagnostics`]),
//! - deterministic benchmark generators with analytic ground truth
//!   ([`benchgen`]),
//! - a config-driven experiment runner with bootstrap confidence intervals
//!   ([`experiment`]).

pub mod adversarial;
pub mod baselines;
pub mod benchgen;
pub mod classifiers;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod rng;

pub use data::{
    build_balancing_problem, load_dataset_csv, log_loss, weighted_outcome_estimate,
    write_dataset_csv, zero_one_loss, BalancingProblem, CsvSchema, Dataset, Estimand,
    LossKind, WeightVector,
};
pub use error::{Error, Result};
