use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layer::{softmax, Layer, LayerSpec};
use super::{CnnError, Tensor};

/// Serializable architecture: input shape plus the layer list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

/// A feed-forward network ending in a softmax over the classes.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
}

/// Parameter gradients laid out like [`CnnModel::blobs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub blobs: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &CnnModel) -> Self {
        Gradients {
            blobs: model.blobs().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.blobs.iter_mut().zip(&other.blobs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.blobs.iter_mut().flatten().for_each(|v| *v *= factor);
    }
}

impl CnnModel {
    /// Builds the network with He-uniform weights (limit sqrt(6 / fan_in))
    /// drawn from a generator seeded with `seed`, and zero biases.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self, CnnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blobs = arch
            .layers
            .iter()
            .filter(|s| s.has_parameters())
            .flat_map(|s| {
                let (nw, nb, fan_in) = s.parameter_layout();
                let limit = (6.0 / fan_in as f64).sqrt();
                let w: Vec<f64> = (0..nw).map(|_| rng.random_range(-limit..limit)).collect();
                [w, vec![0.0; nb]]
            })
            .collect();
        Self::from_parameters(arch, blobs)
    }

    /// Builds the network from explicit parameter blobs (weights then bias for
    /// each parametric layer, in layer order).
    pub fn from_parameters(arch: Architecture, blobs: Vec<Vec<f64>>) -> Result<Self, CnnError> {
        let Architecture { input_shape, layers: specs } = arch;
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(CnnError::InvalidArchitecture(format!("input shape {input_shape:?}")));
        }
        match specs.iter().position(|s| *s == LayerSpec::Softmax) {
            Some(i) if i + 1 == specs.len() && i > 0 => {}
            _ => {
                return Err(CnnError::InvalidArchitecture(
                    "exactly one softmax layer is required, as the last layer".into(),
                ))
            }
        }
        let expected_blobs = 2 * specs.iter().filter(|s| s.has_parameters()).count();
        if blobs.len() != expected_blobs {
            return Err(CnnError::InvalidArchitecture(format!(
                "expected {expected_blobs} parameter blobs, got {}",
                blobs.len()
            )));
        }
        let mut blobs = blobs.into_iter();
        let mut shape = input_shape.clone();
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let output_shape = spec.output_shape(&shape)?;
            let (nw, nb, _) = spec.parameter_layout();
            let (weights, bias) = if spec.has_parameters() {
                let w = blobs.next().unwrap_or_default();
                let b = blobs.next().unwrap_or_default();
                if w.len() != nw || b.len() != nb {
                    return Err(CnnError::ShapeMismatch {
                        expected: vec![nw, nb],
                        found: vec![w.len(), b.len()],
                    });
                }
                if w.iter().chain(&b).any(|v| !v.is_finite()) {
                    return Err(CnnError::NonFinite("parameters"));
                }
                (w, b)
            } else {
                (Vec::new(), Vec::new())
            };
            layers.push(Layer {
                spec,
                input_shape: shape,
                output_shape: output_shape.clone(),
                weights,
                bias,
            });
            shape = output_shape;
        }
        Ok(CnnModel { input_shape, layers })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_shape: self.input_shape.clone(),
            layers: self.layers.iter().map(|l| l.spec.clone()).collect(),
        }
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn class_count(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output_shape[0])
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Output shape of every layer, in order.
    pub fn layer_shapes(&self) -> Vec<Vec<usize>> {
        self.layers.iter().map(|l| l.output_shape.clone()).collect()
    }

    pub fn blobs(&self) -> Vec<&Vec<f64>> {
        self.layers
            .iter()
            .filter(|l| l.spec.has_parameters())
            .flat_map(|l| [&l.weights, &l.bias])
            .collect()
    }

    pub fn blobs_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers
            .iter_mut()
            .filter(|l| l.spec.has_parameters())
            .flat_map(|l| [&mut l.weights, &mut l.bias])
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.blobs().iter().map(|b| b.len()).sum()
    }

    fn check_input(&self, input: &Tensor) -> Result<(), CnnError> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(CnnError::ShapeMismatch {
                expected: self.input_shape.clone(),
                found: input.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Activations before the softmax.
    pub fn logits(&self, input: &Tensor) -> Result<Vec<f64>, CnnError> {
        self.check_input(input)?;
        let body = &self.layers[..self.layers.len() - 1];
        Ok(body.iter().fold(input.data().to_vec(), |x, l| l.forward(&x)))
    }

    /// Class probabilities.
    pub fn forward(&self, input: &Tensor) -> Result<Vec<f64>, CnnError> {
        Ok(softmax(&self.logits(input)?))
    }

    /// Softmax cross-entropy loss for `label` and its gradient with respect
    /// to every parameter.
    pub fn loss_and_gradients(&self, input: &Tensor, label: usize) -> Result<(f64, Gradients), CnnError> {
        self.check_input(input)?;
        let classes = self.class_count();
        if label >= classes {
            return Err(CnnError::InvalidLabel { label, classes });
        }
        let body = &self.layers[..self.layers.len() - 1];
        let mut acts = Vec::with_capacity(body.len() + 1);
        acts.push(input.data().to_vec());
        for layer in body {
            let next = layer.forward(acts.last().expect("non-empty"));
            acts.push(next);
        }
        let z = acts.last().expect("non-empty");
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let loss = lse - z[label];
        let mut g = softmax(z);
        g[label] -= 1.0;

        let mut grads = Gradients::zeros_like(self);
        let mut blob = grads.blobs.len();
        for (i, layer) in body.iter().enumerate().rev() {
            let (gw, gb): (&mut [f64], &mut [f64]) = if layer.spec.has_parameters() {
                blob -= 2;
                let (lo, hi) = grads.blobs.split_at_mut(blob + 1);
                (&mut lo[blob], &mut hi[0])
            } else {
                (&mut [], &mut [])
            };
            g = layer.backward(&acts[i], &acts[i + 1], &g, gw, gb);
        }
        Ok((loss, grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::Activation;

    fn tiny(kind: &str) -> Architecture {
        use LayerSpec::{Conv1d, Conv2d, Dense, MaxPool2d, Softmax};
        let relu = LayerSpec::Activation { function: Activation::Relu };
        let tanh = LayerSpec::Activation { function: Activation::Tanh };
        match kind {
            "conv2d" => Architecture {
                input_shape: vec![2, 6, 6],
                layers: vec![
                    Conv2d { in_channels: 2, out_channels: 3, kernel: 3 },
                    tanh,
                    MaxPool2d { size: 2 },
                    Dense { inputs: 12, outputs: 4 },
                    relu,
                    Dense { inputs: 4, outputs: 5 },
                    Softmax,
                ],
            },
            _ => Architecture {
                input_shape: vec![2, 9],
                layers: vec![
                    Conv1d { in_channels: 2, out_channels: 3, kernel: 3 },
                    tanh,
                    Conv1d { in_channels: 3, out_channels: 2, kernel: 4 },
                    relu,
                    Dense { inputs: 8, outputs: 5 },
                    Softmax,
                ],
            },
        }
    }

    fn random_input(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn gradient_check(arch: Architecture, seed: u64) {
        let model = CnnModel::new(arch, seed).unwrap();
        let x = random_input(model.input_shape(), seed + 100);
        let label = (seed % 5) as usize;
        let (_, grads) = model.loss_and_gradients(&x, label).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for b in 0..grads.blobs.len() {
            for i in 0..grads.blobs[b].len() {
                let mut plus = model.clone();
                plus.blobs_mut()[b][i] += h;
                let mut minus = model.clone();
                minus.blobs_mut()[b][i] -= h;
                let lp = plus.loss_and_gradients(&x, label).unwrap().0;
                let lm = minus.loss_and_gradients(&x, label).unwrap().0;
                let numeric = (lp - lm) / (2.0 * h);
                let analytic = grads.blobs[b][i];
                let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic - numeric).abs() / denom);
            }
        }
        assert!(worst <= 1e-4, "max relative error {worst}");
    }

    #[test]
    fn gradients_match_finite_differences_conv2d() {
        for seed in 0..3 {
            gradient_check(tiny("conv2d"), seed);
        }
    }

    #[test]
    fn gradients_match_finite_differences_conv1d() {
        for seed in 0..3 {
            gradient_check(tiny("conv1d"), seed);
        }
    }

    #[test]
    fn zero_model_gives_uniform_loss() {
        let arch = tiny("conv1d");
        let zeros = CnnModel::new(arch.clone(), 0).unwrap().blobs().iter().map(|b| vec![0.0; b.len()]).collect();
        let model = CnnModel::from_parameters(arch, zeros).unwrap();
        let x = random_input(&[2, 9], 4);
        let (loss, _) = model.loss_and_gradients(&x, 3).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
        assert!((loss - 1.6094).abs() < 1e-4);
    }

    #[test]
    fn dense_only_matches_logistic_regression() {
        let arch = Architecture {
            input_shape: vec![4],
            layers: vec![LayerSpec::Dense { inputs: 4, outputs: 5 }, LayerSpec::Softmax],
        };
        let model = CnnModel::new(arch, 9).unwrap();
        let x = random_input(&[4], 10);
        let label = 2;
        let (_, grads) = model.loss_and_gradients(&x, label).unwrap();
        // closed form: dW = (p - e_y) x^T, db = p - e_y
        let w = model.blobs()[0].clone();
        let z: Vec<f64> = (0..5)
            .map(|j| (0..4).map(|i| w[j * 4 + i] * x.data()[i]).sum::<f64>())
            .collect();
        let ez: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        let s: f64 = ez.iter().sum();
        for (j, e) in ez.iter().enumerate() {
            let r = e / s - if j == label { 1.0 } else { 0.0 };
            assert!((grads.blobs[1][j] - r).abs() < 1e-12);
            for i in 0..4 {
                assert!((grads.blobs[0][j * 4 + i] - r * x.data()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_is_a_distribution_and_checks_shapes() {
        let model = CnnModel::new(tiny("conv2d"), 1).unwrap();
        let p = model.forward(&random_input(&[2, 6, 6], 2)).unwrap();
        assert_eq!(p.len(), 5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        assert!(matches!(
            model.forward(&random_input(&[2, 6, 7], 2)),
            Err(CnnError::ShapeMismatch { .. })
        ));
        assert_eq!(
            model.loss_and_gradients(&random_input(&[2, 6, 6], 2), 5),
            Err(CnnError::InvalidLabel { label: 5, classes: 5 })
        );
    }

    #[test]
    fn architecture_validation() {
        let mut arch = tiny("conv1d");
        arch.layers.pop();
        assert!(matches!(CnnModel::new(arch, 0), Err(CnnError::InvalidArchitecture(_))));
        let mut arch = tiny("conv1d");
        arch.layers[4] = LayerSpec::Dense { inputs: 9, outputs: 5 };
        assert!(matches!(CnnModel::new(arch, 0), Err(CnnError::ShapeMismatch { .. })));
    }
}
