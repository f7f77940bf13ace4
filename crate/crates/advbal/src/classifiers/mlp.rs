//! Small fully-connected network with ReLU hidden layers and a logistic
//! output, trained on the weighted log-loss.

use ndarray::{Array1, Array2, ArrayView2};

use super::linear::{sigmoid, softplus};
use super::optim::Objective;
use crate::rng::RngStream;

/// Layer sizes for `depth` hidden layers of width `2 * d` on `d` inputs.
pub(crate) fn layer_sizes(d: usize, depth: usize) -> Vec<usize> {
    let mut sizes = vec![d];
    sizes.extend(std::iter::repeat(2 * d).take(depth));
    sizes.push(1);
    sizes
}

/// Flat parameter count for a layer-size chain.
pub(crate) fn param_count(sizes: &[usize]) -> usize {
    sizes
        .windows(2)
        .map(|w| w[1] * w[0] + w[1])
        .sum()
}

/// Seeded symmetric-uniform initialization scaled by 1/sqrt(fan_in).
pub(crate) fn init_params(sizes: &[usize], seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed);
    let mut theta = Vec::with_capacity(param_count(sizes));
    for w in sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..(fan_out * fan_in + fan_out) {
            theta.push(rng.uniform_in(-bound, bound));
        }
    }
    theta
}

pub(crate) struct MlpObjective<'a> {
    pub x: &'a Array2<f64>,
    pub y: &'a [f64],
    pub s: &'a [f64],
    pub lambda: f64,
    pub sizes: Vec<usize>,
}

struct LayerSlices<'t> {
    weights: ArrayView2<'t, f64>,
    bias: &'t [f64],
}

fn layers<'t>(theta: &'t [f64], sizes: &[usize]) -> Vec<LayerSlices<'t>> {
    let mut out = Vec::with_capacity(sizes.len() - 1);
    let mut offset = 0;
    for w in sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let weights =
            ArrayView2::from_shape((fan_out, fan_in), &theta[offset..offset + fan_out * fan_in])
                .expect("parameter layout");
        offset += fan_out * fan_in;
        let bias = &theta[offset..offset + fan_out];
        offset += fan_out;
        out.push(LayerSlices { weights, bias });
    }
    out
}

impl MlpObjective<'_> {
    /// Forward pass; returns per-layer pre-activations (the last one holds
    /// the output logits).
    fn forward(&self, theta: &[f64]) -> Vec<Array2<f64>> {
        let layer_views = layers(theta, &self.sizes);
        let mut pre_activations = Vec::with_capacity(layer_views.len());
        let mut activation = self.x.clone();
        for (l, layer) in layer_views.iter().enumerate() {
            let mut z = activation.dot(&layer.weights.t());
            for mut row in z.rows_mut() {
                for (v, b) in row.iter_mut().zip(layer.bias) {
                    *v += b;
                }
            }
            if l + 1 < layer_views.len() {
                activation = z.mapv(|v| v.max(0.0));
            }
            pre_activations.push(z);
        }
        pre_activations
    }

    pub(crate) fn logits(&self, theta: &[f64]) -> Array1<f64> {
        let pre = self.forward(theta);
        pre.last().unwrap().column(0).to_owned()
    }

    fn penalty(&self, theta: &[f64]) -> f64 {
        // biases are not penalized
        layers(theta, &self.sizes)
            .iter()
            .map(|l| l.weights.iter().map(|w| w * w).sum::<f64>())
            .sum()
    }
}

impl Objective for MlpObjective<'_> {
    fn dim(&self) -> usize {
        param_count(&self.sizes)
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let n = self.x.nrows() as f64;
        let z = self.logits(theta);
        let loss: f64 = z
            .iter()
            .zip(self.y)
            .zip(self.s)
            .map(|((&zi, &yi), &si)| si * (softplus(zi) - yi * zi))
            .sum();
        (loss + 0.5 * self.lambda * self.penalty(theta)) / n
    }

    fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let n_units = self.x.nrows();
        let n = n_units as f64;
        let n_layers = self.sizes.len() - 1;
        let pre = self.forward(theta);
        let layer_views = layers(theta, &self.sizes);

        // activations entering each layer
        let mut inputs: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        inputs.push(self.x.clone());
        for z in pre.iter().take(n_layers - 1) {
            inputs.push(z.mapv(|v| v.max(0.0)));
        }

        let logits = pre.last().unwrap().column(0);
        let mut loss = 0.0;
        let mut delta = Array2::<f64>::zeros((n_units, 1));
        for (i, &zi) in logits.iter().enumerate() {
            let (yi, si) = (self.y[i], self.s[i]);
            loss += si * (softplus(zi) - yi * zi);
            delta[[i, 0]] = si * (sigmoid(zi) - yi) / n;
        }

        grad.fill(0.0);
        let mut offsets: Vec<usize> = Vec::with_capacity(n_layers);
        let mut acc = 0;
        for w in self.sizes.windows(2) {
            offsets.push(acc);
            acc += w[1] * w[0] + w[1];
        }

        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let d_weights = delta.t().dot(&inputs[l]); // fan_out x fan_in
            let offset = offsets[l];
            for r in 0..fan_out {
                for c in 0..fan_in {
                    grad[offset + r * fan_in + c] = d_weights[[r, c]]
                        + self.lambda * theta[offset + r * fan_in + c] / n;
                }
                grad[offset + fan_out * fan_in + r] = delta.column(r).sum();
            }
            if l > 0 {
                let mut back = delta.dot(&layer_views[l].weights); // n x fan_in
                // ReLU gate from the previous layer's pre-activation
                for (mut row, z_row) in back.rows_mut().into_iter().zip(pre[l - 1].rows()) {
                    for (v, &z) in row.iter_mut().zip(z_row) {
                        if z <= 0.0 {
                            *v = 0.0;
                        }
                    }
                }
                delta = back;
            }
        }

        (loss + 0.5 * self.lambda * self.penalty(theta)) / n
    }
}
