//! Weighted, L2-regularized logistic objectives: primal (on raw standardized
//! features) and kernelized (on RBF features against a support set).
//!
//! Both objectives are written in mean form,
//! `J = (1/n) [ Σᵢ sᵢ ℓ(zᵢ, yᵢ) + (λ/2) penalty ]`,
//! with sample weights `s` normalized to mean 1, so the gradient scale is
//! O(1) regardless of sample size and the regularization strength weakens
//! with n the way an unscaled sum formulation would.

use ndarray::{Array1, Array2, ArrayView1};

use super::optim::Objective;

/// Numerically stable logistic function.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + e^z)`.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Primal logistic objective; parameters are `[coefficients..., intercept]`.
pub(crate) struct LogisticObjective<'a> {
    pub x: &'a Array2<f64>,
    pub y: &'a [f64],
    pub s: &'a [f64],
    pub lambda: f64,
}

impl LogisticObjective<'_> {
    fn logits(&self, theta: &[f64]) -> Array1<f64> {
        let d = self.x.ncols();
        let beta = ArrayView1::from(&theta[..d]);
        let mut z = self.x.dot(&beta);
        z += theta[d];
        z
    }
}

impl Objective for LogisticObjective<'_> {
    fn dim(&self) -> usize {
        self.x.ncols() + 1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let d = self.x.ncols();
        let n = self.x.nrows() as f64;
        let z = self.logits(theta);
        let loss: f64 = z
            .iter()
            .zip(self.y)
            .zip(self.s)
            .map(|((&zi, &yi), &si)| si * (softplus(zi) - yi * zi))
            .sum();
        let penalty: f64 = theta[..d].iter().map(|b| b * b).sum();
        (loss + 0.5 * self.lambda * penalty) / n
    }

    fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.x.ncols();
        let n = self.x.nrows() as f64;
        let z = self.logits(theta);
        let mut loss = 0.0;
        let mut residual = Array1::<f64>::zeros(self.x.nrows());
        for (i, &zi) in z.iter().enumerate() {
            let (yi, si) = (self.y[i], self.s[i]);
            loss += si * (softplus(zi) - yi * zi);
            residual[i] = si * (sigmoid(zi) - yi) / n;
        }
        let g_beta = self.x.t().dot(&residual);
        for j in 0..d {
            grad[j] = g_beta[j] + self.lambda * theta[j] / n;
        }
        grad[d] = residual.sum();
        let penalty: f64 = theta[..d].iter().map(|b| b * b).sum();
        (loss + 0.5 * self.lambda * penalty) / n
    }
}

/// Kernelized logistic objective over RBF features `phi = K(X, support)`,
/// penalized by the RKHS norm `αᵀ K(support, support) α`. Parameters are
/// `[dual coefficients..., intercept]`. `phi_t` is the transpose of `phi`
/// stored contiguously; the gradient's `phiᵀ r` product runs hundreds of
/// times per fit and a strided transposed view would dominate the cost.
pub(crate) struct KernelObjective<'a> {
    pub phi: &'a Array2<f64>,
    pub phi_t: &'a Array2<f64>,
    pub kmm: &'a Array2<f64>,
    pub y: &'a [f64],
    pub s: &'a [f64],
    pub lambda: f64,
}

impl KernelObjective<'_> {
    fn logits(&self, theta: &[f64]) -> Array1<f64> {
        let m = self.phi.ncols();
        let alpha = ArrayView1::from(&theta[..m]);
        let mut z = self.phi.dot(&alpha);
        z += theta[m];
        z
    }
}

impl Objective for KernelObjective<'_> {
    fn dim(&self) -> usize {
        self.phi.ncols() + 1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let m = self.phi.ncols();
        let n = self.phi.nrows() as f64;
        let z = self.logits(theta);
        let loss: f64 = z
            .iter()
            .zip(self.y)
            .zip(self.s)
            .map(|((&zi, &yi), &si)| si * (softplus(zi) - yi * zi))
            .sum();
        let alpha = ArrayView1::from(&theta[..m]);
        let penalty = alpha.dot(&self.kmm.dot(&alpha));
        (loss + 0.5 * self.lambda * penalty) / n
    }

    fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let m = self.phi.ncols();
        let n = self.phi.nrows() as f64;
        let z = self.logits(theta);
        let mut loss = 0.0;
        let mut residual = Array1::<f64>::zeros(self.phi.nrows());
        for (i, &zi) in z.iter().enumerate() {
            let (yi, si) = (self.y[i], self.s[i]);
            loss += si * (softplus(zi) - yi * zi);
            residual[i] = si * (sigmoid(zi) - yi) / n;
        }
        let alpha = ArrayView1::from(&theta[..m]);
        let k_alpha = self.kmm.dot(&alpha);
        let g_alpha = self.phi_t.dot(&residual);
        for j in 0..m {
            grad[j] = g_alpha[j] + self.lambda * k_alpha[j] / n;
        }
        grad[m] = residual.sum();
        let penalty = alpha.dot(&k_alpha);
        (loss + 0.5 * self.lambda * penalty) / n
    }
}
