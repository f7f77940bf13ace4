//! Comparison weighting methods: inverse propensity weighting and
//! kernel-MMD-minimizing weights on the mean-1 simplex.
//!
//! The MMD route minimizes the squared kernel maximum mean discrepancy
//! between the reweighted source and the target,
//! `(1/n²) wᵀK_SS w − (2/(n n')) wᵀK_ST 1 + ridge ||w/n||²`,
//! with a projected-gradient solver on the scaled simplex
//! `{w ≥ 0, Σw = n}`. The projection is the exact sort-based Euclidean
//! projection; the step size is `1/L` with `L` an upper estimate of the
//! largest eigenvalue (power iteration, capped by the Gershgorin bound,
//! doubled whenever a step fails to descend).

use ndarray::{Array1, Array2};

use crate::classifiers::{fit, FamilySpec};
use crate::data::{BalancingProblem, Dataset, Estimand, WeightVector};
use crate::error::{Error, Result};

/// RBF scale used by the MMD-V1 baseline.
pub const MMD_DEFAULT_SCALE: f64 = 1.0;
/// Tiny ridge stabilizing rank-deficient kernel matrices.
pub const MMD_DEFAULT_RIDGE: f64 = 1e-6;
/// Gradient-mapping norm target for the MMD solver.
pub const MMD_TOL: f64 = 1e-8;
pub const MMD_MAX_ITER: usize = 10_000;

/// Propensities below this are clipped before dividing; such rows are
/// reported as positivity violations.
pub const PROPENSITY_CLIP: f64 = 1e-12;

// ---------------------------------------------------------------------------
// RBF kernel
// ---------------------------------------------------------------------------

/// Gaussian kernel matrix `K[i, j] = exp(-||a_i - b_j||² / (2 scale²))`.
///
/// Distances are accumulated pairwise so identical rows give a distance of
/// exactly zero and a kernel value of exactly one.
pub fn rbf_kernel_matrix(a: &Array2<f64>, b: &Array2<f64>, scale: f64) -> Result<Array2<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::InvalidInput(format!(
            "kernel inputs have {} and {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidInput(format!(
            "kernel scale must be positive, got {scale}"
        )));
    }
    let inv_two_sigma_sq = 1.0 / (2.0 * scale * scale);
    let (n, m, d) = (a.nrows(), b.nrows(), a.ncols());
    let mut k = Array2::zeros((n, m));
    let a_slice = a.as_standard_layout();
    let b_slice = b.as_standard_layout();
    for i in 0..n {
        let ai = a_slice.row(i);
        for j in 0..m {
            let bj = b_slice.row(j);
            let mut d2 = 0.0;
            for t in 0..d {
                let diff = ai[t] - bj[t];
                d2 += diff * diff;
            }
            k[[i, j]] = (-d2 * inv_two_sigma_sq).exp();
        }
    }
    Ok(k)
}

// ---------------------------------------------------------------------------
// Simplex projection and projected-gradient QP
// ---------------------------------------------------------------------------

/// Exact Euclidean projection onto `{x >= 0, Σx = total}` (sort-based).
pub fn project_to_scaled_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - total) / (j + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    v.iter().map(|x| (x - threshold).max(0.0)).collect()
}

/// Quadratic objective `½ wᵀQw + cᵀw` over the mean-1 weight simplex.
///
/// `Q` must be symmetric (checked to 1e-10) and positive semidefinite up to
/// a -1e-8 eigenvalue floor; the PSD side is the caller's contract since an
/// eigendecomposition at construction would dwarf the solve itself.
#[derive(Debug, Clone)]
pub struct QpProblem {
    q: Array2<f64>,
    c: Array1<f64>,
}

impl QpProblem {
    pub fn new(q: Array2<f64>, c: Array1<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::InvalidInput(format!(
                "Q must be square, got {} x {}",
                q.nrows(),
                q.ncols()
            )));
        }
        if c.len() != q.nrows() {
            return Err(Error::InvalidInput(format!(
                "c has {} entries for a {}-dim Q",
                c.len(),
                q.nrows()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite QP coefficients".into()));
        }
        for i in 0..q.nrows() {
            for j in (i + 1)..q.ncols() {
                if (q[[i, j]] - q[[j, i]]).abs() > 1e-10 {
                    return Err(Error::InvalidInput(format!(
                        "Q is not symmetric at ({i}, {j}): {} vs {}",
                        q[[i, j]],
                        q[[j, i]]
                    )));
                }
            }
        }
        Ok(QpProblem { q, c })
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let w = Array1::from(w.to_vec());
        0.5 * w.dot(&self.q.dot(&w)) + self.c.dot(&w)
    }
}

/// Result of a projected-gradient solve.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub weights: WeightVector,
    pub converged: bool,
    pub gradient_mapping_norm: f64,
    pub iterations: usize,
}

fn gershgorin_bound(q: &Array2<f64>) -> f64 {
    let mut bound = 0.0f64;
    for row in q.rows() {
        bound = bound.max(row.iter().map(|v| v.abs()).sum());
    }
    bound
}

fn power_iteration_bound(q: &Array2<f64>) -> f64 {
    let n = q.nrows();
    let mut v = Array1::from_shape_fn(n, |i| 1.0 + 0.01 * ((i % 7) as f64));
    let norm = v.dot(&v).sqrt();
    v /= norm;
    let mut lambda = 0.0;
    for _ in 0..60 {
        let qv = q.dot(&v);
        lambda = v.dot(&qv);
        let qn = qv.dot(&qv).sqrt();
        if qn <= 1e-300 {
            return 0.0;
        }
        v = qv / qn;
    }
    lambda.max(0.0)
}

/// Projected gradient descent on the mean-1 simplex; stops when the
/// gradient-mapping norm `L ||w - proj(w - ∇f/L)||` drops to `tol` or after
/// `max_iter` iterations (the solution is returned with a warning flag).
pub fn simplex_qp_solve(
    qp: &QpProblem,
    init: &WeightVector,
    tol: f64,
    max_iter: usize,
) -> Result<QpSolution> {
    let n = qp.dim();
    if init.len() != n {
        return Err(Error::InvalidInput(format!(
            "init has {} entries for a {n}-dim problem",
            init.len()
        )));
    }
    let gershgorin = gershgorin_bound(&qp.q).max(1e-12);
    let mut lipschitz = (power_iteration_bound(&qp.q) * 1.01)
        .clamp(1e-12, gershgorin);

    let mut w = Array1::from(project_to_scaled_simplex(init.as_slice(), n as f64));
    let mut grad = qp.q.dot(&w) + &qp.c;
    let mut value = 0.5 * (w.dot(&grad) + qp.c.dot(&w));
    let mut gm_norm = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let step = &w - &(grad.mapv(|g| g / lipschitz));
        let next = Array1::from(project_to_scaled_simplex(
            step.as_slice().expect("contiguous"),
            n as f64,
        ));
        let mut moved = 0.0;
        for (a, b) in w.iter().zip(next.iter()) {
            moved += (a - b) * (a - b);
        }
        gm_norm = lipschitz * moved.sqrt();
        let next_grad = qp.q.dot(&next) + &qp.c;
        let next_value = 0.5 * (next.dot(&next_grad) + qp.c.dot(&next));
        if next_value > value && lipschitz < gershgorin {
            // the eigenvalue estimate was too small for a monotone step
            lipschitz = (lipschitz * 2.0).min(gershgorin);
            continue;
        }
        w = next;
        grad = next_grad;
        value = next_value;
        if gm_norm <= tol {
            converged = true;
            break;
        }
    }

    let weights = WeightVector::normalized(w.to_vec())?;
    Ok(QpSolution {
        weights,
        converged,
        gradient_mapping_norm: gm_norm,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// MMD weights
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MmdResult {
    pub weights: WeightVector,
    pub converged: bool,
    pub gradient_mapping_norm: f64,
    /// Final value of the MMD objective (target-target term omitted).
    pub objective: f64,
}

fn mmd_qp(prob: &BalancingProblem, scale: f64, ridge: f64) -> Result<QpProblem> {
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ridge must be nonnegative, got {ridge}"
        )));
    }
    let n = prob.n_source() as f64;
    let n_target = prob.n_target() as f64;
    let k_ss = rbf_kernel_matrix(prob.source(), prob.source(), scale)?;
    let k_st = rbf_kernel_matrix(prob.source(), prob.target(), scale)?;
    let mut q = k_ss.mapv(|v| 2.0 * v / (n * n));
    let ridge_diag = 2.0 * ridge / (n * n);
    for i in 0..prob.n_source() {
        q[[i, i]] += ridge_diag;
    }
    let ones = Array1::ones(prob.n_target());
    let c = k_st.dot(&ones).mapv(|v| -2.0 * v / (n * n_target));
    QpProblem::new(q, c)
}

/// Value of the MMD objective (without the constant target-target term) at
/// an arbitrary weight vector.
pub fn mmd_objective(
    prob: &BalancingProblem,
    scale: f64,
    ridge: f64,
    w: &WeightVector,
) -> Result<f64> {
    let qp = mmd_qp(prob, scale, ridge)?;
    Ok(qp.objective(w.as_slice()))
}

/// Minimize the squared kernel MMD between the reweighted source and the
/// target over mean-1 nonnegative weights, starting from uniform.
pub fn mmd_weights(prob: &BalancingProblem, scale: f64, ridge: f64) -> Result<MmdResult> {
    let qp = mmd_qp(prob, scale, ridge)?;
    let init = WeightVector::uniform(prob.n_source())?;
    let sol = simplex_qp_solve(&qp, &init, MMD_TOL, MMD_MAX_ITER)?;
    let objective = qp.objective(sol.weights.as_slice());
    Ok(MmdResult {
        weights: sol.weights,
        converged: sol.converged,
        gradient_mapping_norm: sol.gradient_mapping_norm,
        objective,
    })
}

// ---------------------------------------------------------------------------
// Inverse propensity weighting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct IpwResult {
    pub weights: WeightVector,
    /// Source rows (original dataset indices) whose estimated propensity hit
    /// the clip floor; weights were still produced from the clipped value.
    pub positivity_violations: Vec<usize>,
    /// Estimated propensity of the modeled arm for each source row.
    pub propensities: Vec<f64>,
}

/// Inverse propensity weights for the units with `A = treatment_value`,
/// normalized to mean 1 (Hajek form). No trimming: propensities are only
/// clipped at [`PROPENSITY_CLIP`] to avoid division overflow, and clipped
/// rows are reported.
pub fn ipw_weights(
    ds: &Dataset,
    family: &FamilySpec,
    estimand: &Estimand,
    treatment_value: u32,
    seed: u64,
) -> Result<IpwResult> {
    let source_rows = ds.rows_with(treatment_value);
    if source_rows.len() < 2 {
        return Err(Error::DegenerateProblem(format!(
            "only {} units with treatment {treatment_value}",
            source_rows.len()
        )));
    }
    let n_total = ds.n_rows() as f64;
    let uniform = vec![1.0; ds.n_rows()];

    let (modeled_arm, odds_form) = match estimand {
        Estimand::Att { reference } => {
            if *reference == treatment_value {
                return Err(Error::InvalidInput(
                    "ATT reference arm must differ from the reweighted arm".into(),
                ));
            }
            (*reference, true)
        }
        _ => (treatment_value, false),
    };

    let labels: Vec<u8> = ds
        .treatment()
        .iter()
        .map(|&a| (a == modeled_arm) as u8)
        .collect();
    let model = fit(family, ds.covariates(), &labels, &uniform, seed)?;
    let all_probs = model.predict_proba(ds.covariates())?;

    let marginal_modeled =
        labels.iter().map(|&v| v as f64).sum::<f64>() / n_total;
    let marginal_source = source_rows.len() as f64 / n_total;

    let mut raw = Vec::with_capacity(source_rows.len());
    let mut violations = Vec::new();
    let mut propensities = Vec::with_capacity(source_rows.len());
    for &i in &source_rows {
        let p = all_probs[i];
        propensities.push(p);
        if odds_form {
            // reweight the source arm toward the modeled (reference) arm
            if p <= PROPENSITY_CLIP || 1.0 - p <= PROPENSITY_CLIP {
                violations.push(i);
            }
            let p_ref = p.max(PROPENSITY_CLIP);
            let p_src = (1.0 - p).max(PROPENSITY_CLIP);
            raw.push(p_ref / p_src * (marginal_source / marginal_modeled));
        } else {
            if p <= PROPENSITY_CLIP {
                violations.push(i);
            }
            raw.push(marginal_modeled / p.max(PROPENSITY_CLIP));
        }
    }
    let weights = WeightVector::normalized(raw)?;
    Ok(IpwResult {
        weights,
        positivity_violations: violations,
        propensities,
    })
}
