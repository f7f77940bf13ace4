//! Adversarial balancing: alternate between fitting a discriminator that
//! separates the weighted source sample (label 0) from the target sample
//! (label 1), and pushing the source weights with an exponentiated-gradient
//! step to increase the discriminator's error.
//!
//! The discriminator is refit from scratch every round on the augmented
//! dataset, whose class weights are constructed so both samples carry equal
//! total weight. Target weights are never modified. The returned weights are
//! the last iterate; the per-iteration trace lets callers pick otherwise.

use ndarray::{Array1, Array2, Axis};

use crate::classifiers::{cross_val_select, fit, CvSelection, FamilySpec, FoldPlan};
use crate::data::{zero_one_loss, BalancingProblem, LossKind, WeightVector};
use crate::error::{Error, Result};
use crate::rng::mix_seed;

/// Folds used for the one-shot family selection preceding the loop.
const CV_SELECT_FOLDS: usize = 5;

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Step-size rule for the exponentiated-gradient update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRateSchedule {
    /// `alpha_t = 1 / (1 + 0.5 t)` for the 0-based iteration index t:
    /// 1, 2/3, 1/2, 2/5, ...
    InverseDecay,
    Constant(f64),
}

impl LearningRateSchedule {
    pub fn alpha(&self, t: usize) -> f64 {
        match self {
            LearningRateSchedule::InverseDecay => 1.0 / (1.0 + 0.5 * t as f64),
            LearningRateSchedule::Constant(a) => *a,
        }
    }
}

/// How per-unit discriminator predictions are obtained each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    /// Score the training points with the model fit on them (fast; the
    /// configuration used for the benchmark experiments).
    TrainPredictions,
    /// k-fold cross-fitting: each point is scored by the model fit on the
    /// other folds, approximating generalization error.
    KFoldCrossFit(usize),
}

/// Discriminator family: fixed, or selected once by cross-validation on the
/// initial (uniform-weight) augmented dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyChoice {
    Fixed(FamilySpec),
    CvSelect(Vec<FamilySpec>),
}

#[derive(Debug, Clone)]
pub struct AdversarialParams {
    pub n_iter: usize,
    /// Loss fed to the weight update; the discriminator itself always trains
    /// on the log-loss surrogate.
    pub loss: LossKind,
    pub schedule: LearningRateSchedule,
    pub prediction_mode: PredictionMode,
    pub family: FamilyChoice,
    pub seed: u64,
}

impl AdversarialParams {
    /// Defaults matching the benchmark experiments: 20 iterations, 0-1 loss,
    /// decaying learning rate, train predictions.
    pub fn new(family: FamilySpec) -> Self {
        AdversarialParams {
            n_iter: 20,
            loss: LossKind::ZeroOne,
            schedule: LearningRateSchedule::InverseDecay,
            prediction_mode: PredictionMode::TrainPredictions,
            family: FamilyChoice::Fixed(family),
            seed: 0,
        }
    }

    pub fn with_cv_select(candidates: Vec<FamilySpec>) -> Self {
        AdversarialParams {
            family: FamilyChoice::CvSelect(candidates),
            ..AdversarialParams::new(FamilySpec::logistic_regression())
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidInput("n_iter must be at least 1".into()));
        }
        for t in 0..self.n_iter {
            if !(self.schedule.alpha(t) > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "learning rate at iteration {t} is not positive"
                )));
            }
        }
        if let PredictionMode::KFoldCrossFit(k) = self.prediction_mode {
            if k < 2 {
                return Err(Error::InvalidInput(format!(
                    "cross-fitting needs k >= 2 folds, got {k}"
                )));
            }
        }
        if let FamilyChoice::CvSelect(candidates) = &self.family {
            if candidates.is_empty() {
                return Err(Error::InvalidInput(
                    "cv_select needs at least one candidate family".into(),
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Augmented dataset
// ---------------------------------------------------------------------------

/// Source rows stacked above target rows, labeled 0 and 1, with initial
/// weights giving both classes equal total weight `n`.
#[derive(Debug, Clone)]
pub struct AugmentedData {
    pub x: Array2<f64>,
    pub labels: Vec<u8>,
    pub weights: Vec<f64>,
}

/// Build the augmented labeled dataset: labels are `n` zeros then `n'` ones;
/// initial weights are 1 on the source and `n/n'` on the target.
pub fn augment_labeled_dataset(prob: &BalancingProblem) -> AugmentedData {
    let (n, n_target) = (prob.n_source(), prob.n_target());
    let x = ndarray::concatenate(Axis(0), &[prob.source().view(), prob.target().view()])
        .expect("matching column counts");
    let mut labels = vec![0u8; n];
    labels.extend(std::iter::repeat(1u8).take(n_target));
    let mut weights = vec![1.0; n];
    weights.extend(std::iter::repeat(n as f64 / n_target as f64).take(n_target));
    AugmentedData { x, labels, weights }
}

// ---------------------------------------------------------------------------
// Exponentiated-gradient step
// ---------------------------------------------------------------------------

/// One multiplicative weight update:
/// `w_i <- n · w_i exp(alpha l_i) / Σ_j w_j exp(alpha l_j)`.
///
/// The losses are shifted by their maximum before exponentiation, which
/// cannot change the result (the common factor cancels in the
/// normalization) but keeps the arithmetic bounded; when all losses are
/// equal the update is exactly the identity.
pub fn exp_gradient_step(
    w: &WeightVector,
    per_unit_losses: &[f64],
    alpha: f64,
) -> Result<WeightVector> {
    let n = w.len();
    if per_unit_losses.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} losses for {n} weights",
            per_unit_losses.len()
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "step size must be positive and finite, got {alpha}"
        )));
    }
    if per_unit_losses.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::InvalidInput(
            "per-unit losses must be finite and nonnegative".into(),
        ));
    }
    if w.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidInput("all-zero weight vector".into()));
    }
    let max_loss = per_unit_losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_loss = per_unit_losses.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_loss == min_loss {
        return Ok(w.clone());
    }
    let scaled: Vec<f64> = w
        .iter()
        .zip(per_unit_losses)
        .map(|(wi, li)| wi * (alpha * (li - max_loss)).exp())
        .collect();
    let sum: f64 = scaled.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::InvalidInput(
            "exponentiated update collapsed to zero mass".into(),
        ));
    }
    let scale = n as f64 / sum;
    WeightVector::new(scaled.into_iter().map(|v| v * scale).collect())
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

/// Per-iteration diagnostics of one adversarial run.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// Two-term weighted 0-1 training loss of this round's discriminator,
    /// evaluated at the weights it was trained with; lies in [0, 2].
    pub discriminator_loss: f64,
    /// Source weights after this round's update.
    pub weights: WeightVector,
    /// `Σ (w_i / n)²` of the updated weights.
    pub weight_sq_norm: f64,
    /// `2 (1 - L_n)`; unclamped, so slightly negative values are possible
    /// when the discriminator does worse than chance.
    pub h_divergence_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct AdversarialTrace {
    pub iterations: Vec<IterationRecord>,
    /// Present when the family was chosen by cross-validation.
    pub selection: Option<CvSelection>,
}

/// Two-term weighted 0-1 loss of predictions on an augmented dataset:
/// target misclassification averaged over `n'` plus weighted source
/// misclassification averaged over `n`.
pub fn two_term_zero_one_loss(
    predictions: &Array1<f64>,
    n_source: usize,
    source_weights: &WeightVector,
) -> Result<f64> {
    if predictions.len() <= n_source {
        return Err(Error::InvalidInput(
            "predictions do not cover source and target".into(),
        ));
    }
    if source_weights.len() != n_source {
        return Err(Error::InvalidInput("weight/source length mismatch".into()));
    }
    let n_target = predictions.len() - n_source;
    let mut source_term = 0.0;
    for (i, wi) in source_weights.iter().enumerate() {
        source_term += wi * zero_one_loss(predictions[i], 0)?;
    }
    let mut target_term = 0.0;
    for i in n_source..predictions.len() {
        target_term += zero_one_loss(predictions[i], 1)?;
    }
    Ok(target_term / n_target as f64 + source_term / n_source as f64)
}

// ---------------------------------------------------------------------------
// Main loop
// ---------------------------------------------------------------------------

pub(crate) fn crossfit_predictions(
    x: &Array2<f64>,
    labels: &[u8],
    weights: &[f64],
    family: &FamilySpec,
    plan: &FoldPlan,
    seed: u64,
) -> Result<Array1<f64>> {
    let mut preds = Array1::zeros(x.nrows());
    for f in 0..plan.k {
        let (held, train) = plan.split(f);
        let x_train = x.select(Axis(0), &train);
        let y_train: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
        let w_train: Vec<f64> = train.iter().map(|&i| weights[i]).collect();
        let model = fit(family, &x_train, &y_train, &w_train, mix_seed(seed, f as u64))?;
        let x_held = x.select(Axis(0), &held);
        let fold_preds = model.predict_proba(&x_held)?;
        for (slot, &i) in fold_preds.iter().zip(&held) {
            preds[i] = *slot;
        }
    }
    Ok(preds)
}

/// Run the adversarial balancing loop and return the final source weights
/// together with the per-iteration trace.
pub fn adversarial_balance(
    prob: &BalancingProblem,
    params: &AdversarialParams,
) -> Result<(WeightVector, AdversarialTrace)> {
    params.validate()?;
    let n = prob.n_source();
    let augmented = augment_labeled_dataset(prob);

    // family selection happens once, on the initial uniform-weight data
    let (family, selection) = match &params.family {
        FamilyChoice::Fixed(spec) => (spec.clone(), None),
        FamilyChoice::CvSelect(candidates) => {
            let sel = cross_val_select(
                candidates,
                &augmented.x,
                &augmented.labels,
                &augmented.weights,
                CV_SELECT_FOLDS,
                mix_seed(params.seed, 0xC5),
            )?;
            (sel.spec.clone(), Some(sel))
        }
    };

    let fold_plan = match params.prediction_mode {
        PredictionMode::TrainPredictions => None,
        PredictionMode::KFoldCrossFit(k) => Some(FoldPlan::stratified(
            &augmented.labels,
            k,
            mix_seed(params.seed, 0xF0),
        )?),
    };

    let mut weights = WeightVector::uniform(n)?;
    let mut aug_weights = augmented.weights.clone();
    let mut iterations = Vec::with_capacity(params.n_iter);

    for t in 0..params.n_iter {
        aug_weights[..n].copy_from_slice(weights.as_slice());
        let iter_seed = mix_seed(params.seed, t as u64 + 1);
        let predictions = match &fold_plan {
            None => {
                let model = fit(
                    &family,
                    &augmented.x,
                    &augmented.labels,
                    &aug_weights,
                    iter_seed,
                )?;
                model.predict_proba(&augmented.x)?
            }
            Some(plan) => crossfit_predictions(
                &augmented.x,
                &augmented.labels,
                &aug_weights,
                &family,
                plan,
                iter_seed,
            )?,
        };

        let discriminator_loss = two_term_zero_one_loss(&predictions, n, &weights)?;
        let per_unit_losses: Vec<f64> = predictions
            .iter()
            .take(n)
            .map(|&p| params.loss.eval(p, 0))
            .collect::<Result<_>>()?;
        weights = exp_gradient_step(&weights, &per_unit_losses, params.schedule.alpha(t))?;

        let weight_sq_norm = weights
            .iter()
            .map(|w| (w / n as f64) * (w / n as f64))
            .sum::<f64>();
        iterations.push(IterationRecord {
            discriminator_loss,
            weights: weights.clone(),
            weight_sq_norm,
            h_divergence_estimate: 2.0 * (1.0 - discriminator_loss),
        });
    }

    Ok((weights, AdversarialTrace { iterations, selection }))
}
