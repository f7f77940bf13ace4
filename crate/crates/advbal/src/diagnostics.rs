//! Balance and error-bound diagnostics.
//!
//! The central quantity is the classifier two-sample divergence between the
//! weighted source and the target: for a symmetric hypothesis family it
//! equals `2 (1 - min_h L_n(w, h))`, where `L_n` is the two-term weighted
//! 0-1 loss of the discriminator. Low divergence plus low weight
//! variability `||w/n||²` bounds the weighted estimation error via
//! [`theorem_bound`].

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::adversarial::{
    augment_labeled_dataset, crossfit_predictions, two_term_zero_one_loss, PredictionMode,
};
use crate::classifiers::{fit, FamilySpec, FoldPlan};
use crate::data::{BalancingProblem, WeightVector};
use crate::error::{Error, Result};
use crate::rng::mix_seed;

/// Discriminator used by [`h_divergence`].
#[derive(Debug, Clone)]
pub enum DiscriminatorFamily {
    /// A trainable family; the divergence uses its fitted loss.
    Fitted(FamilySpec),
    /// All threshold classifiers `1[x > c]` over the observed 1-D cut
    /// points, together with their inverses. The minimal loss is found by
    /// exhaustive enumeration, so the divergence is exact for this family
    /// (the prediction mode is irrelevant and ignored).
    ExhaustiveThresholds,
}

/// Canonical cut points for the exhaustive threshold family on pooled 1-D
/// data: midpoints between consecutive distinct values, plus one cut below
/// the minimum and one above the maximum (the constant classifiers).
pub fn threshold_cuts(pooled: &[f64]) -> Vec<f64> {
    let mut values: Vec<f64> = pooled.to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    values.dedup();
    let mut cuts = Vec::with_capacity(values.len() + 1);
    cuts.push(values[0] - 1.0);
    for pair in values.windows(2) {
        cuts.push(0.5 * (pair[0] + pair[1]));
    }
    cuts.push(values[values.len() - 1] + 1.0);
    cuts
}

fn exhaustive_threshold_min_loss(
    prob: &BalancingProblem,
    w: &WeightVector,
) -> Result<f64> {
    if prob.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "threshold family requires 1-D covariates, got d = {}",
            prob.dim()
        )));
    }
    let source: Vec<f64> = prob.source().column(0).to_vec();
    let target: Vec<f64> = prob.target().column(0).to_vec();
    let mut pooled = source.clone();
    pooled.extend_from_slice(&target);
    let n = source.len() as f64;
    let n_target = target.len() as f64;

    let mut min_loss = f64::INFINITY;
    for &cut in &threshold_cuts(&pooled) {
        // h(x) = 1[x > cut]
        let target_miss = target.iter().filter(|&&x| x <= cut).count() as f64 / n_target;
        let source_hit: f64 = source
            .iter()
            .zip(w.iter())
            .filter(|(&x, _)| x > cut)
            .map(|(_, &wi)| wi)
            .sum::<f64>()
            / n;
        let loss = target_miss + source_hit;
        // inverse hypothesis 1 - h
        let inv_target_miss =
            target.iter().filter(|&&x| x > cut).count() as f64 / n_target;
        let inv_source_hit: f64 = source
            .iter()
            .zip(w.iter())
            .filter(|(&x, _)| x <= cut)
            .map(|(_, &wi)| wi)
            .sum::<f64>()
            / n;
        let inv_loss = inv_target_miss + inv_source_hit;
        min_loss = min_loss.min(loss).min(inv_loss);
    }
    Ok(min_loss)
}

/// Empirical two-sample divergence `clamp(2 (1 - L_n), 0, 2)` where `L_n` is
/// the minimal two-term weighted 0-1 loss the discriminator reaches on the
/// augmented dataset under weights `w`.
pub fn h_divergence(
    prob: &BalancingProblem,
    w: &WeightVector,
    family: &DiscriminatorFamily,
    mode: PredictionMode,
    seed: u64,
) -> Result<f64> {
    if w.len() != prob.n_source() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} source units",
            w.len(),
            prob.n_source()
        )));
    }
    let min_loss = match family {
        DiscriminatorFamily::ExhaustiveThresholds => exhaustive_threshold_min_loss(prob, w)?,
        DiscriminatorFamily::Fitted(spec) => {
            let augmented = augment_labeled_dataset(prob);
            let mut aug_weights = augmented.weights.clone();
            aug_weights[..w.len()].copy_from_slice(w.as_slice());
            let predictions = match mode {
                PredictionMode::TrainPredictions => {
                    let model =
                        fit(spec, &augmented.x, &augmented.labels, &aug_weights, seed)?;
                    model.predict_proba(&augmented.x)?
                }
                PredictionMode::KFoldCrossFit(k) => {
                    let plan =
                        FoldPlan::stratified(&augmented.labels, k, mix_seed(seed, 0xF0))?;
                    crossfit_predictions(
                        &augmented.x,
                        &augmented.labels,
                        &aug_weights,
                        spec,
                        &plan,
                        seed,
                    )?
                }
            };
            two_term_zero_one_loss(&predictions, prob.n_source(), w)?
        }
    };
    Ok((2.0 * (1.0 - min_loss)).clamp(0.0, 2.0))
}

// ---------------------------------------------------------------------------
// Moment diagnostics
// ---------------------------------------------------------------------------

/// Standardized mean differences per covariate, with degeneracy flags for
/// zero-variance coordinates.
#[derive(Debug, Clone)]
pub struct SmdReport {
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
}

fn column_mean_var(x: &Array2<f64>, j: usize) -> (f64, f64) {
    let col = x.column(j);
    let n = col.len() as f64;
    let mean = col.sum() / n;
    let var = if col.len() > 1 {
        col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Per covariate: (weighted source mean - target mean) / pooled sd, with the
/// pooled sd from unweighted sample variances `sqrt((var_S + var_T) / 2)`.
/// Zero-variance coordinates report 0 and are flagged.
pub fn standardized_mean_difference(prob: &BalancingProblem, w: &WeightVector) -> Result<SmdReport> {
    if w.len() != prob.n_source() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} source units",
            w.len(),
            prob.n_source()
        )));
    }
    let n = prob.n_source() as f64;
    let d = prob.dim();
    let mut values = Vec::with_capacity(d);
    let mut degenerate = Vec::with_capacity(d);
    for j in 0..d {
        let weighted_source_mean = prob
            .source()
            .column(j)
            .iter()
            .zip(w.iter())
            .map(|(x, wi)| x * wi)
            .sum::<f64>()
            / n;
        let (_, var_s) = column_mean_var(prob.source(), j);
        let (target_mean, var_t) = column_mean_var(prob.target(), j);
        let pooled_sd = ((var_s + var_t) / 2.0).sqrt();
        if pooled_sd > 0.0 {
            values.push((weighted_source_mean - target_mean) / pooled_sd);
            degenerate.push(false);
        } else {
            values.push(0.0);
            degenerate.push(true);
        }
    }
    Ok(SmdReport { values, degenerate })
}

/// Weight variability `Σ (w_i / n)²`; 1/n at uniform weights, 1 at a point
/// mass.
pub fn weight_sq_norm(w: &WeightVector) -> f64 {
    let n = w.len() as f64;
    w.iter().map(|wi| (wi / n) * (wi / n)).sum()
}

/// Kish effective sample size `(Σw)² / Σw²`, the reciprocal of
/// [`weight_sq_norm`] under mean-1 weights.
pub fn effective_sample_size(w: &WeightVector) -> f64 {
    1.0 / weight_sq_norm(w)
}

/// Estimation-error bound at confidence `1 - delta` for outcomes whose
/// conditional-mean function is representable by the discriminator family
/// with combination mass at most `m_y`:
/// `(m_y / 2) d_h + 2 m_y sqrt(2 w_sq_norm ln(2 / delta))`.
pub fn theorem_bound(d_h: f64, w_sq_norm: f64, m_y: f64, delta: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&d_h) || !d_h.is_finite() {
        return Err(Error::InvalidInput(format!(
            "divergence {d_h} outside [0, 2]"
        )));
    }
    if !(w_sq_norm > 0.0 && w_sq_norm <= 1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "weight squared norm {w_sq_norm} outside (0, 1]"
        )));
    }
    if !(m_y > 0.0) || !m_y.is_finite() {
        return Err(Error::InvalidInput(format!(
            "outcome bound {m_y} must be positive"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence level {delta} outside (0, 1)"
        )));
    }
    Ok(m_y / 2.0 * d_h + 2.0 * m_y * (2.0 * w_sq_norm * (2.0 / delta).ln()).sqrt())
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Bundled balance diagnostics for one weighting solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    pub h_divergence: f64,
    pub smd: Vec<f64>,
    pub weight_sq_norm: f64,
    pub ess: f64,
    pub bound: Option<f64>,
}

/// Compute the full diagnostic report; `bound_inputs` is `(m_y, delta)`.
pub fn balance_report(
    prob: &BalancingProblem,
    w: &WeightVector,
    family: &DiscriminatorFamily,
    mode: PredictionMode,
    seed: u64,
    bound_inputs: Option<(f64, f64)>,
) -> Result<BalanceReport> {
    let h_div = h_divergence(prob, w, family, mode, seed)?;
    let smd = standardized_mean_difference(prob, w)?;
    let sq_norm = weight_sq_norm(w);
    let bound = match bound_inputs {
        Some((m_y, delta)) => Some(theorem_bound(h_div, sq_norm, m_y, delta)?),
        None => None,
    };
    Ok(BalanceReport {
        h_divergence: h_div,
        smd: smd.values,
        weight_sq_norm: sq_norm,
        ess: effective_sample_size(w),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn gaussian(rng: &mut RngStream, n: usize, d: usize, shift: f64) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| rng.normal() + shift)
    }

    #[test]
    fn identical_samples_have_small_divergence() {
        for seed in 0..10 {
            let mut rng = RngStream::new(seed);
            let x = gaussian(&mut rng, 500, 3, 0.0);
            let prob = BalancingProblem::new(x.clone(), x).unwrap();
            let w = WeightVector::uniform(500).unwrap();
            let d = h_divergence(
                &prob,
                &w,
                &DiscriminatorFamily::Fitted(FamilySpec::logistic_regression()),
                PredictionMode::TrainPredictions,
                seed,
            )
            .unwrap();
            assert!(d < 0.15, "seed {seed}: divergence {d}");
        }
        // same distribution, independent draws: training-set predictions
        // overfit a little, so only a looser ceiling applies
        for seed in 0..5 {
            let mut rng = RngStream::new(100 + seed);
            let a = gaussian(&mut rng, 500, 2, 0.0);
            let b = gaussian(&mut rng, 500, 2, 0.0);
            let prob = BalancingProblem::new(a, b).unwrap();
            let w = WeightVector::uniform(500).unwrap();
            let d = h_divergence(
                &prob,
                &w,
                &DiscriminatorFamily::Fitted(FamilySpec::logistic_regression()),
                PredictionMode::TrainPredictions,
                seed,
            )
            .unwrap();
            assert!(d < 0.3, "seed {seed}: divergence {d}");
        }
    }

    #[test]
    fn separated_samples_have_near_maximal_divergence() {
        for seed in 0..5 {
            let mut rng = RngStream::new(7 + seed);
            let a = gaussian(&mut rng, 300, 2, -4.0);
            let b = gaussian(&mut rng, 300, 2, 4.0);
            let prob = BalancingProblem::new(a, b).unwrap();
            let w = WeightVector::uniform(300).unwrap();
            let d = h_divergence(
                &prob,
                &w,
                &DiscriminatorFamily::Fitted(FamilySpec::logistic_regression()),
                PredictionMode::TrainPredictions,
                seed,
            )
            .unwrap();
            assert!(d > 1.9, "seed {seed}: divergence {d}");
        }
    }

    /// Direct maximization of the weighted mean-difference form over the
    /// same threshold family; the independent route for the equality check.
    fn direct_divergence(prob: &BalancingProblem, w: &WeightVector) -> f64 {
        let source: Vec<f64> = prob.source().column(0).to_vec();
        let target: Vec<f64> = prob.target().column(0).to_vec();
        let mut pooled = source.clone();
        pooled.extend_from_slice(&target);
        let n = source.len() as f64;
        let n_target = target.len() as f64;
        let mut best = 0.0f64;
        for cut in threshold_cuts(&pooled) {
            let source_mean: f64 = source
                .iter()
                .zip(w.iter())
                .filter(|(&x, _)| x > cut)
                .map(|(_, &wi)| wi)
                .sum::<f64>()
                / n;
            let target_mean =
                target.iter().filter(|&&x| x > cut).count() as f64 / n_target;
            best = best.max((source_mean - target_mean).abs());
        }
        2.0 * best
    }

    #[test]
    fn threshold_divergence_matches_direct_maximization() {
        let mut rng = RngStream::new(50);
        for case in 0..20 {
            let n = 3 + rng.index(28);
            let m = 3 + rng.index(28);
            let source = Array2::from_shape_fn((n, 1), |_| rng.normal());
            let target = Array2::from_shape_fn((m, 1), |_| rng.normal() * 1.3 + 0.2);
            let prob = BalancingProblem::new(source, target).unwrap();
            let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.05).collect();
            let w = WeightVector::normalized(raw).unwrap();
            let via_loss = h_divergence(
                &prob,
                &w,
                &DiscriminatorFamily::ExhaustiveThresholds,
                PredictionMode::TrainPredictions,
                0,
            )
            .unwrap();
            let direct = direct_divergence(&prob, &w);
            assert!(
                (via_loss - direct).abs() <= 1e-9,
                "case {case}: {via_loss} vs {direct}"
            );
        }
    }

    #[test]
    fn smd_examples() {
        let mut rng = RngStream::new(13);
        let x = gaussian(&mut rng, 400, 3, 0.0);
        let prob = BalancingProblem::new(x.clone(), x.clone()).unwrap();
        let w = WeightVector::uniform(400).unwrap();
        let report = standardized_mean_difference(&prob, &w).unwrap();
        for v in &report.values {
            assert!(v.abs() < 1e-12);
        }

        // shift covariate 0 of the source by one sd
        let mut shifted = x.clone();
        for v in shifted.column_mut(0) {
            *v += 1.0;
        }
        let prob = BalancingProblem::new(shifted, x).unwrap();
        let report = standardized_mean_difference(&prob, &w).unwrap();
        assert!((report.values[0] - 1.0).abs() < 0.15, "smd {}", report.values[0]);
        assert!(report.values[1].abs() < 0.15);

        // constant covariate equal on both sides: zero with a flag
        let constant = Array2::from_elem((50, 1), 2.5);
        let prob = BalancingProblem::new(constant.clone(), constant).unwrap();
        let w = WeightVector::uniform(50).unwrap();
        let report = standardized_mean_difference(&prob, &w).unwrap();
        assert_eq!(report.values[0], 0.0);
        assert!(report.degenerate[0]);
    }

    #[test]
    fn weight_sq_norm_examples() {
        let w = WeightVector::uniform(100).unwrap();
        assert_abs_diff_eq!(weight_sq_norm(&w), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_sample_size(&w), 100.0, epsilon = 1e-9);

        let mut point_mass = vec![0.0; 10];
        point_mass[0] = 10.0;
        let w = WeightVector::new(point_mass).unwrap();
        assert_abs_diff_eq!(weight_sq_norm(&w), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(effective_sample_size(&w), 1.0, epsilon = 1e-12);

        let w = WeightVector::new(vec![2.0, 0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(weight_sq_norm(&w), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn theorem_bound_examples() {
        let n = 100.0;
        let bound = theorem_bound(0.0, 1.0 / n, 1.0, 0.05).unwrap();
        let expected = 2.0 * (2.0 * (40.0f64).ln() / n).sqrt();
        assert_abs_diff_eq!(bound, expected, epsilon = 1e-12);

        let b1 = theorem_bound(0.7, 0.02, 1.0, 0.05).unwrap();
        let b2 = theorem_bound(0.7, 0.02, 2.0, 0.05).unwrap();
        assert_abs_diff_eq!(b2, 2.0 * b1, epsilon = 1e-12);

        assert!(theorem_bound(2.3, 0.02, 1.0, 0.05).is_err());
        assert!(theorem_bound(0.5, 0.0, 1.0, 0.05).is_err());
        assert!(theorem_bound(0.5, 0.02, 1.0, 1.5).is_err());
    }

    #[test]
    fn balance_report_serializes_with_fixed_names() {
        let report = BalanceReport {
            h_divergence: 0.25,
            smd: vec![0.1, -0.2],
            weight_sq_norm: 0.02,
            ess: 50.0,
            bound: None,
        };
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("h_divergence").is_some());
        assert!(json.get("smd").unwrap().is_array());
        assert!(json.get("weight_sq_norm").is_some());
        assert!(json.get("ess").is_some());
        assert!(json.get("bound").unwrap().is_null());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sq_norm_reciprocal_identity_and_floor(
            raw in prop::collection::vec(0.01..3.0f64, 2..50),
        ) {
            let n = raw.len() as f64;
            let w = WeightVector::normalized(raw).unwrap();
            let sq = weight_sq_norm(&w);
            prop_assert!(sq >= 1.0 / n - 1e-12);
            prop_assert!(sq <= 1.0 + 1e-12);
            let ess = effective_sample_size(&w);
            prop_assert!((ess * sq - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn h_divergence_stays_in_range(seed in 0u64..50) {
            let mut rng = RngStream::new(seed);
            let n = 10 + rng.index(30);
            let m = 10 + rng.index(30);
            let source = Array2::from_shape_fn((n, 1), |_| rng.normal());
            let target = Array2::from_shape_fn((m, 1), |_| rng.normal() + rng.uniform());
            let prob = BalancingProblem::new(source, target).unwrap();
            let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.01).collect();
            let w = WeightVector::normalized(raw).unwrap();
            let d = h_divergence(
                &prob,
                &w,
                &DiscriminatorFamily::ExhaustiveThresholds,
                PredictionMode::TrainPredictions,
                seed,
            ).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
        }
    }
}
