//! Weighted binary classifiers used as plug-in discriminators.
//!
//! Three families are available: logistic regression, RBF-kernel logistic
//! regression (a probabilistic stand-in for an RBF-kernel SVM with the same
//! hypothesis capacity), and multilayer perceptrons with 1-3 hidden layers
//! of width twice the input dimension. All fits minimize the weighted,
//! L2-regularized log-loss on internally standardized features with a
//! deterministic full-batch optimizer, so refitting the same data with the
//! same seed reproduces the model bit for bit.

mod folds;
mod linear;
mod mlp;
mod optim;
mod standardize;

pub use folds::FoldPlan;
pub use standardize::Standardizer;

use ndarray::{Array1, Array2, Axis};

use crate::baselines::rbf_kernel_matrix;
use crate::error::{Error, Result};
use crate::rng::{mix_seed, RngStream};
use linear::{sigmoid, KernelObjective, LogisticObjective};
use mlp::MlpObjective;
use optim::{minimize_fixed_halving, minimize_lbfgs, Objective};

/// Fits on more rows than this use a strided subset of the training rows as
/// the kernel support set, keeping per-iteration cost linear in n.
pub const MAX_KERNEL_SUPPORT: usize = 128;

const GRADIENT_CHECK_SEED: u64 = 0x6772_6164;

// ---------------------------------------------------------------------------
// Family specification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    LogisticRegression,
    KernelLogisticRbf,
    Mlp { depth: usize },
}

/// RBF length-scale policy for the kernel family, expressed in standardized
/// feature space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelScale {
    /// `gamma = 1 / (d * pooled feature variance)` at fit time.
    Auto,
    /// Fixed sigma in `exp(-||.||^2 / (2 sigma^2))`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingBudget {
    pub max_iter: usize,
    pub tol: f64,
}

/// A classifier family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub regularization: f64,
    pub kernel_scale: KernelScale,
    pub budget: TrainingBudget,
}

impl FamilySpec {
    pub fn logistic_regression() -> Self {
        FamilySpec {
            kind: FamilyKind::LogisticRegression,
            regularization: 1.0,
            kernel_scale: KernelScale::Auto,
            budget: TrainingBudget {
                max_iter: 1000,
                tol: 1e-6,
            },
        }
    }

    pub fn kernel_rbf() -> Self {
        FamilySpec {
            kind: FamilyKind::KernelLogisticRbf,
            regularization: 1.0,
            kernel_scale: KernelScale::Auto,
            budget: TrainingBudget {
                max_iter: 1000,
                tol: 1e-6,
            },
        }
    }

    pub fn kernel_rbf_with_scale(sigma: f64) -> Self {
        FamilySpec {
            kernel_scale: KernelScale::Fixed(sigma),
            ..FamilySpec::kernel_rbf()
        }
    }

    pub fn mlp(depth: usize) -> Self {
        FamilySpec {
            kind: FamilyKind::Mlp { depth },
            regularization: 1e-4,
            kernel_scale: KernelScale::Auto,
            budget: TrainingBudget {
                max_iter: 2000,
                tol: 1e-6,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.regularization <= 0.0 || !self.regularization.is_finite() {
            return Err(Error::InvalidInput(format!(
                "regularization must be positive, got {}",
                self.regularization
            )));
        }
        if let KernelScale::Fixed(s) = self.kernel_scale {
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "kernel scale must be positive, got {s}"
                )));
            }
        }
        if let FamilyKind::Mlp { depth } = self.kind {
            if !(1..=3).contains(&depth) {
                return Err(Error::InvalidInput(format!(
                    "MLP depth must be 1, 2 or 3, got {depth}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            FamilyKind::LogisticRegression => write!(f, "lr"),
            FamilyKind::KernelLogisticRbf => write!(f, "rbf"),
            FamilyKind::Mlp { depth } => write!(f, "mlp{depth}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Fitted model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum FittedParams {
    Linear {
        coef: Array1<f64>,
        intercept: f64,
    },
    Kernel {
        support: Array2<f64>,
        dual_coef: Array1<f64>,
        intercept: f64,
        sigma: f64,
    },
    Mlp {
        theta: Vec<f64>,
        sizes: Vec<usize>,
    },
}

/// A fitted weighted binary discriminator.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    family: FamilySpec,
    standardizer: Standardizer,
    params: FittedParams,
    /// False when the optimizer exhausted its budget before reaching the
    /// gradient tolerance; the model is still usable.
    pub converged: bool,
}

impl ClassifierModel {
    pub fn family(&self) -> &FamilySpec {
        &self.family
    }

    /// P(label = 1 | x) per row. Deterministic given the model.
    pub fn predict_proba(&self, x: &Array2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.standardizer.dim() {
            return Err(Error::InvalidInput(format!(
                "model expects {} columns, got {}",
                self.standardizer.dim(),
                x.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite prediction input".into()));
        }
        let z = self.decision_values(x)?;
        Ok(z.mapv(sigmoid))
    }

    /// Raw decision values (logits) per row.
    fn decision_values(&self, x: &Array2<f64>) -> Result<Array1<f64>> {
        let xs = self.standardizer.transform(x);
        match &self.params {
            FittedParams::Linear { coef, intercept } => {
                let mut z = xs.dot(coef);
                z += *intercept;
                Ok(z)
            }
            FittedParams::Kernel {
                support,
                dual_coef,
                intercept,
                sigma,
            } => {
                let phi = rbf_kernel_matrix(&xs, support, *sigma)?;
                let mut z = phi.dot(dual_coef);
                z += *intercept;
                Ok(z)
            }
            FittedParams::Mlp { theta, sizes } => {
                let obj = MlpObjective {
                    x: &xs,
                    y: &[],
                    s: &[],
                    lambda: 0.0,
                    sizes: sizes.clone(),
                };
                Ok(obj.logits(theta))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Fit
// ---------------------------------------------------------------------------

/// Everything derived from the training data that the objectives borrow.
struct Prepared {
    x_std: Array2<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    lambda: f64,
    // kernel family
    phi: Option<Array2<f64>>,
    phi_t: Option<Array2<f64>>,
    kmm: Option<Array2<f64>>,
    support: Option<Array2<f64>>,
    sigma: f64,
    // mlp family
    sizes: Option<Vec<usize>>,
}

impl Prepared {
    fn with_objective<R>(&self, kind: FamilyKind, run: impl FnOnce(&dyn Objective) -> R) -> R {
        match kind {
            FamilyKind::LogisticRegression => run(&LogisticObjective {
                x: &self.x_std,
                y: &self.y,
                s: &self.s,
                lambda: self.lambda,
            }),
            FamilyKind::KernelLogisticRbf => run(&KernelObjective {
                phi: self.phi.as_ref().expect("kernel features"),
                phi_t: self.phi_t.as_ref().expect("kernel features transpose"),
                kmm: self.kmm.as_ref().expect("kernel gram"),
                y: &self.y,
                s: &self.s,
                lambda: self.lambda,
            }),
            FamilyKind::Mlp { .. } => run(&MlpObjective {
                x: &self.x_std,
                y: &self.y,
                s: &self.s,
                lambda: self.lambda,
                sizes: self.sizes.clone().expect("mlp sizes"),
            }),
        }
    }
}

fn prepare(
    family: &FamilySpec,
    x: &Array2<f64>,
    labels: &[u8],
    sample_weights: &[f64],
) -> Result<(Prepared, Standardizer)> {
    family.validate()?;
    let n = x.nrows();
    if labels.len() != n || sample_weights.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} labels and {} weights",
            n,
            labels.len(),
            sample_weights.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training input".into()));
    }
    if sample_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput(
            "sample weights must be finite and nonnegative".into(),
        ));
    }
    let mut class_weight = [0.0f64; 2];
    for (&y, &w) in labels.iter().zip(sample_weights) {
        if y > 1 {
            return Err(Error::InvalidInput(format!("label {y} not in {{0, 1}}")));
        }
        class_weight[y as usize] += w;
    }
    if class_weight[0] <= 0.0 || class_weight[1] <= 0.0 {
        return Err(Error::DegenerateLabels(format!(
            "class total weights are {class_weight:?}; both classes need positive weight"
        )));
    }

    // weights normalized to mean 1 keep the regularization strength
    // invariant to rescaling all weights by a constant
    let mean_w = sample_weights.iter().sum::<f64>() / n as f64;
    let s: Vec<f64> = sample_weights.iter().map(|w| w / mean_w).collect();
    let y: Vec<f64> = labels.iter().map(|&v| v as f64).collect();

    let standardizer = Standardizer::fit(x, &s);
    let x_std = standardizer.transform(x);

    let mut prep = Prepared {
        x_std,
        y,
        s,
        lambda: family.regularization,
        phi: None,
        phi_t: None,
        kmm: None,
        support: None,
        sigma: 1.0,
        sizes: None,
    };

    match family.kind {
        FamilyKind::LogisticRegression => {}
        FamilyKind::KernelLogisticRbf => {
            let d = prep.x_std.ncols();
            let sigma = match family.kernel_scale {
                KernelScale::Fixed(s) => s,
                KernelScale::Auto => {
                    // gamma = 1 / (d * pooled variance), sigma = sqrt(1/(2 gamma))
                    let pooled = weighted_pooled_variance(&prep.x_std, &prep.s).max(1e-12);
                    (d as f64 * pooled / 2.0).sqrt()
                }
            };
            let m = n.min(MAX_KERNEL_SUPPORT);
            let idx: Vec<usize> = (0..m).map(|j| j * n / m).collect();
            let support = prep.x_std.select(Axis(0), &idx);
            let phi = rbf_kernel_matrix(&prep.x_std, &support, sigma)?;
            prep.phi_t = Some(phi.t().as_standard_layout().to_owned());
            prep.phi = Some(phi);
            prep.kmm = Some(rbf_kernel_matrix(&support, &support, sigma)?);
            prep.support = Some(support);
            prep.sigma = sigma;
        }
        FamilyKind::Mlp { depth } => {
            prep.sizes = Some(mlp::layer_sizes(prep.x_std.ncols(), depth));
        }
    }
    Ok((prep, standardizer))
}

fn weighted_pooled_variance(x: &Array2<f64>, s: &[f64]) -> f64 {
    let n = x.nrows() as f64;
    let d = x.ncols();
    let mut total = 0.0;
    for j in 0..d {
        let col = x.column(j);
        let mu = col.iter().zip(s).map(|(v, w)| v * w).sum::<f64>() / n;
        total += col
            .iter()
            .zip(s)
            .map(|(v, w)| w * (v - mu) * (v - mu))
            .sum::<f64>()
            / n;
    }
    total / d as f64
}

/// Fit a weighted discriminator. `seed` only affects families with random
/// initialization (the MLP); the convex fits are seed-free.
pub fn fit(
    family: &FamilySpec,
    x: &Array2<f64>,
    labels: &[u8],
    sample_weights: &[f64],
    seed: u64,
) -> Result<ClassifierModel> {
    let (prep, standardizer) = prepare(family, x, labels, sample_weights)?;
    let (theta, converged) = match family.kind {
        FamilyKind::Mlp { .. } => {
            let sizes = prep.sizes.clone().expect("mlp sizes");
            let theta0 = mlp::init_params(&sizes, seed);
            let res = prep.with_objective(family.kind, |obj| {
                minimize_fixed_halving(obj, theta0, family.budget.max_iter, family.budget.tol)
            });
            (res.theta, res.converged)
        }
        _ => {
            let dim = prep.with_objective(family.kind, |obj| obj.dim());
            let res = prep.with_objective(family.kind, |obj| {
                minimize_lbfgs(obj, vec![0.0; dim], family.budget.max_iter, family.budget.tol)
            });
            (res.theta, res.converged)
        }
    };
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "optimizer produced non-finite parameters".into(),
        ));
    }

    let params = match family.kind {
        FamilyKind::LogisticRegression => {
            let d = prep.x_std.ncols();
            FittedParams::Linear {
                coef: Array1::from(theta[..d].to_vec()),
                intercept: theta[d],
            }
        }
        FamilyKind::KernelLogisticRbf => {
            let support = prep.support.expect("kernel support");
            let m = support.nrows();
            FittedParams::Kernel {
                support,
                dual_coef: Array1::from(theta[..m].to_vec()),
                intercept: theta[m],
                sigma: prep.sigma,
            }
        }
        FamilyKind::Mlp { .. } => FittedParams::Mlp {
            theta,
            sizes: prep.sizes.expect("mlp sizes"),
        },
    };
    Ok(ClassifierModel {
        family: family.clone(),
        standardizer,
        params,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Cross-validated family selection
// ---------------------------------------------------------------------------

/// Outcome of [`cross_val_select`].
#[derive(Debug, Clone)]
pub struct CvSelection {
    /// Index of the winning candidate in the candidate list.
    pub index: usize,
    pub spec: FamilySpec,
    /// Mean weighted zero-one error per candidate, fold-averaged.
    pub mean_errors: Vec<f64>,
    pub folds_used: usize,
    /// True when k was reduced to the minority-class count.
    pub reduced_folds: bool,
}

/// Pick the candidate family minimizing the mean weighted zero-one error
/// across k stratified folds. Ties break toward the earlier candidate; the
/// fold assignment is deterministic given `seed`.
pub fn cross_val_select(
    candidates: &[FamilySpec],
    x: &Array2<f64>,
    labels: &[u8],
    sample_weights: &[f64],
    k: usize,
    seed: u64,
) -> Result<CvSelection> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidate families".into()));
    }
    if x.nrows() < k {
        return Err(Error::InvalidInput(format!(
            "{} rows cannot be split into {k} folds",
            x.nrows()
        )));
    }
    let plan = FoldPlan::stratified(labels, k, seed)?;
    let mut mean_errors = Vec::with_capacity(candidates.len());
    for (c_idx, family) in candidates.iter().enumerate() {
        let mut fold_errors = Vec::with_capacity(plan.k);
        for f in 0..plan.k {
            let (held, train) = plan.split(f);
            let x_train = x.select(Axis(0), &train);
            let y_train: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
            let w_train: Vec<f64> = train.iter().map(|&i| sample_weights[i]).collect();
            let model = fit(
                family,
                &x_train,
                &y_train,
                &w_train,
                mix_seed(seed, (c_idx * plan.k + f) as u64),
            )?;
            let x_held = x.select(Axis(0), &held);
            let preds = model.predict_proba(&x_held)?;
            let y_held: Vec<u8> = held.iter().map(|&i| labels[i]).collect();
            let w_held: Vec<f64> = held.iter().map(|&i| sample_weights[i]).collect();
            fold_errors.push(weighted_zero_one_error(&preds, &y_held, &w_held)?);
        }
        mean_errors.push(fold_errors.iter().sum::<f64>() / fold_errors.len() as f64);
    }
    let mut index = 0;
    for (i, &e) in mean_errors.iter().enumerate() {
        if e < mean_errors[index] {
            index = i;
        }
    }
    Ok(CvSelection {
        index,
        spec: candidates[index].clone(),
        mean_errors,
        folds_used: plan.k,
        reduced_folds: plan.reduced,
    })
}

/// Weighted zero-one error of probabilistic predictions, normalized by the
/// total weight.
pub fn weighted_zero_one_error(
    preds: &Array1<f64>,
    labels: &[u8],
    weights: &[f64],
) -> Result<f64> {
    if preds.len() != labels.len() || preds.len() != weights.len() {
        return Err(Error::InvalidInput("length mismatch".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("zero total weight".into()));
    }
    let mut err = 0.0;
    for ((&p, &y), &w) in preds.iter().zip(labels).zip(weights) {
        err += w * crate::data::zero_one_loss(p, y)?;
    }
    Ok(err / total)
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

/// Compare the analytic gradient of the weighted regularized log-loss
/// against central finite differences at a fixed random parameter point.
/// Returns the maximum scaled discrepancy
/// `|g - fd| / max(1, |g|, |fd|)` over coordinates.
pub fn gradient_check(
    family: &FamilySpec,
    x: &Array2<f64>,
    labels: &[u8],
    weights: &[f64],
    epsilon: f64,
) -> Result<f64> {
    if x.nrows() > 50 || x.ncols() > 5 {
        return Err(Error::InvalidInput(format!(
            "gradient check is limited to n <= 50, d <= 5; got {} x {}",
            x.nrows(),
            x.ncols()
        )));
    }
    let (prep, _) = prepare(family, x, labels, weights)?;
    Ok(prep.with_objective(family.kind, |obj| {
        let mut rng = RngStream::new(GRADIENT_CHECK_SEED);
        let theta: Vec<f64> = (0..obj.dim()).map(|_| 0.3 * rng.normal()).collect();
        let mut grad = vec![0.0; obj.dim()];
        obj.value_grad(&theta, &mut grad);
        let mut worst = 0.0f64;
        for i in 0..obj.dim() {
            let mut plus = theta.clone();
            plus[i] += epsilon;
            let mut minus = theta.clone();
            minus[i] -= epsilon;
            let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * epsilon);
            let scale = grad[i].abs().max(fd.abs()).max(1.0);
            worst = worst.max((grad[i] - fd).abs() / scale);
        }
        worst
    }))
}
