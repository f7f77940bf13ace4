//! Deterministic full-batch first-order minimizers.
//!
//! Two variants are used by the classifier fits: spectral (Barzilai-Borwein)
//! gradient descent with an Armijo backtracking safeguard for the convex
//! objectives, and plain gradient descent with step halving on loss increase
//! for the MLP. Both are seed-free and bit-reproducible.

/// A differentiable training objective over a flat parameter vector.
pub(crate) trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, theta: &[f64]) -> f64;
    /// Returns the objective value and writes the gradient into `grad`.
    fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64;
}

pub(crate) struct Descent {
    pub theta: Vec<f64>,
    pub converged: bool,
    #[allow(dead_code)]
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory quasi-Newton descent (two-loop recursion) with Armijo
/// backtracking. Gradient-only and fully deterministic; used for the convex
/// logistic-type objectives.
pub(crate) fn minimize_lbfgs(
    obj: &dyn Objective,
    theta0: Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> Descent {
    const HISTORY: usize = 8;
    let dim = obj.dim();
    debug_assert_eq!(theta0.len(), dim);
    let mut theta = theta0;
    let mut grad = vec![0.0; dim];
    let mut value = obj.value_grad(&theta, &mut grad);
    // (displacement, gradient change, 1 / yᵀs) ring buffer, newest last
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(HISTORY);

    for iter in 0..max_iter {
        let grad_norm = inf_norm(&grad);
        if grad_norm <= tol {
            return Descent {
                theta,
                converged: true,
                iterations: iter,
            };
        }

        // two-loop recursion for the search direction
        let mut direction = grad.clone();
        let mut alphas = vec![0.0; history.len()];
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &direction);
            alphas[k] = a;
            for i in 0..dim {
                direction[i] -= a * y[i];
            }
        }
        if let Some((s, y, _)) = history.last() {
            let scale = dot(s, y) / dot(y, y).max(1e-300);
            for d in direction.iter_mut() {
                *d *= scale;
            }
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &direction);
            for i in 0..dim {
                direction[i] += (alphas[k] - b) * s[i];
            }
        }
        // descent safeguard: fall back to the raw gradient if curvature
        // information produced an ascent direction
        let mut slope = dot(&grad, &direction);
        if !(slope > 0.0) || !slope.is_finite() {
            direction.copy_from_slice(&grad);
            let scale = 1.0 / grad_norm.max(1e-12);
            for d in direction.iter_mut() {
                *d *= scale;
            }
            slope = dot(&grad, &direction);
            history.clear();
        }

        let mut eta = 1.0f64;
        let mut candidate = vec![0.0; dim];
        let mut candidate_value;
        loop {
            for i in 0..dim {
                candidate[i] = theta[i] - eta * direction[i];
            }
            candidate_value = obj.value(&candidate);
            if candidate_value <= value - 1e-4 * eta * slope || eta < 1e-18 {
                break;
            }
            eta *= 0.5;
        }
        if eta < 1e-18 {
            // step size exhausted; no further progress possible in f64
            return Descent {
                theta,
                converged: grad_norm <= tol,
                iterations: iter,
            };
        }
        let mut new_grad = vec![0.0; dim];
        let new_value = obj.value_grad(&candidate, &mut new_grad);
        let mut s = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        for i in 0..dim {
            s[i] = candidate[i] - theta[i];
            y[i] = new_grad[i] - grad[i];
        }
        let ys = dot(&y, &s);
        if ys > 1e-300 {
            if history.len() == HISTORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / ys));
        }
        theta = candidate;
        grad = new_grad;
        value = new_value.min(candidate_value);
    }
    let converged = inf_norm(&grad) <= tol;
    Descent {
        theta,
        converged,
        iterations: max_iter,
    }
}

/// Plain gradient descent with a fixed step that is halved whenever a step
/// would increase the loss. Rejected steps consume an iteration, bounding
/// total work at `max_iter` gradient evaluations.
pub(crate) fn minimize_fixed_halving(
    obj: &dyn Objective,
    theta0: Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> Descent {
    let dim = obj.dim();
    let mut theta = theta0;
    let mut grad = vec![0.0; dim];
    let mut value = obj.value_grad(&theta, &mut grad);
    let mut eta = 1.0;

    for iter in 0..max_iter {
        if inf_norm(&grad) <= tol {
            return Descent {
                theta,
                converged: true,
                iterations: iter,
            };
        }
        if eta < 1e-14 {
            break;
        }
        let candidate: Vec<f64> = theta
            .iter()
            .zip(&grad)
            .map(|(t, g)| t - eta * g)
            .collect();
        let candidate_value = obj.value(&candidate);
        if candidate_value > value {
            eta *= 0.5;
            continue;
        }
        theta = candidate;
        value = obj.value_grad(&theta, &mut grad);
        let _ = candidate_value;
    }
    let converged = inf_norm(&grad) <= tol;
    Descent {
        theta,
        converged,
        iterations: max_iter,
    }
}
