//! Per-column feature standardization captured at fit time.

use ndarray::Array2;

/// Column means and scales computed from weighted training moments; applied
/// to raw inputs before any classifier sees them, and stored in the fitted
/// model so raw inputs can be scored later.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    /// Fit from `x` with mean-1 sample weights `s`.
    pub fn fit(x: &Array2<f64>, s: &[f64]) -> Self {
        let n = x.nrows() as f64;
        let d = x.ncols();
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for j in 0..d {
            let col = x.column(j);
            let mu = col.iter().zip(s).map(|(v, w)| v * w).sum::<f64>() / n;
            let var = col
                .iter()
                .zip(s)
                .map(|(v, w)| w * (v - mu) * (v - mu))
                .sum::<f64>()
                / n;
            mean[j] = mu;
            // constant columns pass through unscaled
            scale[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|v| (v - self.mean[j]) / self.scale[j]);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn standardizes_to_zero_mean_unit_scale() {
        let x = array![[1.0, 10.0], [3.0, 10.0], [5.0, 10.0]];
        let s = vec![1.0; 3];
        let st = Standardizer::fit(&x, &s);
        let z = st.transform(&x);
        let mean0: f64 = z.column(0).sum() / 3.0;
        assert!(mean0.abs() < 1e-12);
        let var0: f64 = z.column(0).iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((var0 - 1.0).abs() < 1e-12);
        // constant column is centered but not rescaled
        assert!(z.column(1).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn weighted_moments_follow_the_weights() {
        let x = array![[0.0], [10.0]];
        // all weight on the second row
        let st = Standardizer::fit(&x, &[0.0, 2.0]);
        let z = st.transform(&x);
        assert!(z[[1, 0]].abs() < 1e-12);
    }
}
