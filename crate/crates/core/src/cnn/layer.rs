use serde::{Deserialize, Serialize};

use super::CnnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

/// Architecture-level description of one layer. Convolutions are valid
/// (no padding, stride 1); pooling windows are non-overlapping. `Dense`
/// flattens whatever it receives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d { in_channels: usize, out_channels: usize, kernel: usize },
    Conv1d { in_channels: usize, out_channels: usize, kernel: usize },
    MaxPool2d { size: usize },
    Dense { inputs: usize, outputs: usize },
    Activation { function: Activation },
    Softmax,
}

impl LayerSpec {
    /// Output shape for `input`, or an error when the layer cannot accept it.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, CnnError> {
        let mismatch = |expected: Vec<usize>| CnnError::ShapeMismatch {
            expected,
            found: input.to_vec(),
        };
        match *self {
            LayerSpec::Conv2d { in_channels, out_channels, kernel } => match *input {
                [c, h, w] if c == in_channels && h >= kernel && w >= kernel && kernel > 0 => {
                    Ok(vec![out_channels, h - kernel + 1, w - kernel + 1])
                }
                _ => Err(mismatch(vec![in_channels, kernel, kernel])),
            },
            LayerSpec::Conv1d { in_channels, out_channels, kernel } => match *input {
                [c, l] if c == in_channels && l >= kernel && kernel > 0 => Ok(vec![out_channels, l - kernel + 1]),
                _ => Err(mismatch(vec![in_channels, kernel])),
            },
            LayerSpec::MaxPool2d { size } => match *input {
                [c, h, w] if size > 0 && h >= size && w >= size => Ok(vec![c, h / size, w / size]),
                _ => Err(mismatch(vec![0, size, size])),
            },
            LayerSpec::Dense { inputs, outputs } => {
                if input.iter().product::<usize>() == inputs {
                    Ok(vec![outputs])
                } else {
                    Err(mismatch(vec![inputs]))
                }
            }
            LayerSpec::Activation { .. } => Ok(input.to_vec()),
            LayerSpec::Softmax => match *input {
                [_] => Ok(input.to_vec()),
                _ => Err(mismatch(vec![input.iter().product()])),
            },
        }
    }

    /// `(weight count, bias count, fan-in)`.
    pub fn parameter_layout(&self) -> (usize, usize, usize) {
        match *self {
            LayerSpec::Conv2d { in_channels, out_channels, kernel } => {
                let fan_in = in_channels * kernel * kernel;
                (out_channels * fan_in, out_channels, fan_in)
            }
            LayerSpec::Conv1d { in_channels, out_channels, kernel } => {
                let fan_in = in_channels * kernel;
                (out_channels * fan_in, out_channels, fan_in)
            }
            LayerSpec::Dense { inputs, outputs } => (inputs * outputs, outputs, inputs),
            _ => (0, 0, 0),
        }
    }

    pub fn has_parameters(&self) -> bool {
        self.parameter_layout().1 > 0
    }
}

/// A layer together with its parameters and resolved input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub input_shape: Vec<usize>,
    pub output_shape: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let out_len: usize = self.output_shape.iter().product();
        match self.spec {
            LayerSpec::Conv2d { in_channels, out_channels, kernel } => {
                let (h, w) = (self.input_shape[1], self.input_shape[2]);
                let (oh, ow) = (self.output_shape[1], self.output_shape[2]);
                let mut out = vec![0.0; out_len];
                for o in 0..out_channels {
                    let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
                    plane.iter_mut().for_each(|v| *v = self.bias[o]);
                    for c in 0..in_channels {
                        for ky in 0..kernel {
                            for kx in 0..kernel {
                                let wv = self.weights[((o * in_channels + c) * kernel + ky) * kernel + kx];
                                for y in 0..oh {
                                    let src = &x[c * h * w + (y + ky) * w + kx..][..ow];
                                    let dst = &mut plane[y * ow..(y + 1) * ow];
                                    for (d, s) in dst.iter_mut().zip(src) {
                                        *d += wv * s;
                                    }
                                }
                            }
                        }
                    }
                }
                out
            }
            LayerSpec::Conv1d { in_channels, out_channels, kernel } => {
                let l = self.input_shape[1];
                let ol = self.output_shape[1];
                let mut out = vec![0.0; out_len];
                for o in 0..out_channels {
                    let row = &mut out[o * ol..(o + 1) * ol];
                    row.iter_mut().for_each(|v| *v = self.bias[o]);
                    for c in 0..in_channels {
                        for k in 0..kernel {
                            let wv = self.weights[(o * in_channels + c) * kernel + k];
                            let src = &x[c * l + k..][..ol];
                            for (d, s) in row.iter_mut().zip(src) {
                                *d += wv * s;
                            }
                        }
                    }
                }
                out
            }
            LayerSpec::MaxPool2d { size } => {
                let (ch, h, w) = (self.input_shape[0], self.input_shape[1], self.input_shape[2]);
                let (oh, ow) = (self.output_shape[1], self.output_shape[2]);
                let mut out = vec![0.0; out_len];
                for c in 0..ch {
                    for y in 0..oh {
                        for xo in 0..ow {
                            out[(c * oh + y) * ow + xo] = x[pool_argmax(x, c, h, w, y, xo, size)];
                        }
                    }
                }
                out
            }
            LayerSpec::Dense { inputs, outputs } => (0..outputs)
                .map(|j| {
                    let row = &self.weights[j * inputs..(j + 1) * inputs];
                    self.bias[j] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect(),
            LayerSpec::Activation { function } => match function {
                Activation::Relu => x.iter().map(|v| v.max(0.0)).collect(),
                Activation::Tanh => x.iter().map(|v| v.tanh()).collect(),
            },
            LayerSpec::Softmax => softmax(x),
        }
    }

    /// Given the layer input `x`, its output `y` and the upstream gradient
    /// `gy`, accumulates parameter gradients into `gw`/`gb` and returns the
    /// gradient with respect to `x`. Softmax is handled by the loss.
    pub fn backward(&self, x: &[f64], y: &[f64], gy: &[f64], gw: &mut [f64], gb: &mut [f64]) -> Vec<f64> {
        let mut gx = vec![0.0; x.len()];
        match self.spec {
            LayerSpec::Conv2d { in_channels, out_channels, kernel } => {
                let (h, w) = (self.input_shape[1], self.input_shape[2]);
                let (oh, ow) = (self.output_shape[1], self.output_shape[2]);
                for o in 0..out_channels {
                    let gplane = &gy[o * oh * ow..(o + 1) * oh * ow];
                    gb[o] += gplane.iter().sum::<f64>();
                    for c in 0..in_channels {
                        for ky in 0..kernel {
                            for kx in 0..kernel {
                                let wi = ((o * in_channels + c) * kernel + ky) * kernel + kx;
                                let wv = self.weights[wi];
                                let mut acc = 0.0;
                                for yy in 0..oh {
                                    let off = c * h * w + (yy + ky) * w + kx;
                                    let g = &gplane[yy * ow..(yy + 1) * ow];
                                    acc += g.iter().zip(&x[off..off + ow]).map(|(a, b)| a * b).sum::<f64>();
                                    for (d, gv) in gx[off..off + ow].iter_mut().zip(g) {
                                        *d += wv * gv;
                                    }
                                }
                                gw[wi] += acc;
                            }
                        }
                    }
                }
            }
            LayerSpec::Conv1d { in_channels, out_channels, kernel } => {
                let l = self.input_shape[1];
                let ol = self.output_shape[1];
                for o in 0..out_channels {
                    let g = &gy[o * ol..(o + 1) * ol];
                    gb[o] += g.iter().sum::<f64>();
                    for c in 0..in_channels {
                        for k in 0..kernel {
                            let wi = (o * in_channels + c) * kernel + k;
                            let off = c * l + k;
                            gw[wi] += g.iter().zip(&x[off..off + ol]).map(|(a, b)| a * b).sum::<f64>();
                            let wv = self.weights[wi];
                            for (d, gv) in gx[off..off + ol].iter_mut().zip(g) {
                                *d += wv * gv;
                            }
                        }
                    }
                }
            }
            LayerSpec::MaxPool2d { size } => {
                let (ch, h, w) = (self.input_shape[0], self.input_shape[1], self.input_shape[2]);
                let (oh, ow) = (self.output_shape[1], self.output_shape[2]);
                for c in 0..ch {
                    for yy in 0..oh {
                        for xo in 0..ow {
                            gx[pool_argmax(x, c, h, w, yy, xo, size)] += gy[(c * oh + yy) * ow + xo];
                        }
                    }
                }
            }
            LayerSpec::Dense { inputs, outputs } => {
                for j in 0..outputs {
                    let g = gy[j];
                    gb[j] += g;
                    let row = &self.weights[j * inputs..(j + 1) * inputs];
                    let grow = &mut gw[j * inputs..(j + 1) * inputs];
                    for i in 0..inputs {
                        grow[i] += g * x[i];
                        gx[i] += g * row[i];
                    }
                }
            }
            LayerSpec::Activation { function } => {
                for i in 0..x.len() {
                    gx[i] = gy[i]
                        * match function {
                            Activation::Relu => f64::from(u8::from(x[i] > 0.0)),
                            Activation::Tanh => 1.0 - y[i] * y[i],
                        };
                }
            }
            LayerSpec::Softmax => gx.copy_from_slice(gy),
        }
        gx
    }
}

/// Flat index of the first maximum in pooling window (`y`, `x`) of channel `c`.
fn pool_argmax(input: &[f64], c: usize, h: usize, w: usize, y: usize, x: usize, size: usize) -> usize {
    let mut best = c * h * w + y * size * w + x * size;
    for dy in 0..size {
        for dx in 0..size {
            let i = c * h * w + (y * size + dy) * w + x * size + dx;
            if input[i] > input[best] {
                best = i;
            }
        }
    }
    best
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_compose() {
        let conv = LayerSpec::Conv2d { in_channels: 1, out_channels: 6, kernel: 5 };
        assert_eq!(conv.output_shape(&[1, 60, 60]).unwrap(), vec![6, 56, 56]);
        assert!(conv.output_shape(&[2, 60, 60]).is_err());
        assert!(conv.output_shape(&[1, 4, 60]).is_err());
        let pool = LayerSpec::MaxPool2d { size: 2 };
        assert_eq!(pool.output_shape(&[6, 56, 56]).unwrap(), vec![6, 28, 28]);
        let c1 = LayerSpec::Conv1d { in_channels: 1, out_channels: 6, kernel: 5 };
        assert_eq!(c1.output_shape(&[1, 16]).unwrap(), vec![6, 12]);
        let dense = LayerSpec::Dense { inputs: 128, outputs: 64 };
        assert_eq!(dense.output_shape(&[16, 8]).unwrap(), vec![64]);
        assert!(dense.output_shape(&[16, 9]).is_err());
    }

    #[test]
    fn softmax_is_a_distribution() {
        let p = softmax(&[1000.0, 0.0, -1000.0, 3.0, 2.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        let u = softmax(&[0.0; 5]);
        assert!(u.iter().all(|v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn pooling_routes_gradient_to_first_max() {
        let layer = Layer {
            spec: LayerSpec::MaxPool2d { size: 2 },
            input_shape: vec![1, 2, 2],
            output_shape: vec![1, 1, 1],
            weights: vec![],
            bias: vec![],
        };
        let x = [1.0, 3.0, 3.0, 2.0];
        let y = layer.forward(&x);
        assert_eq!(y, vec![3.0]);
        let gx = layer.backward(&x, &y, &[1.0], &mut [], &mut []);
        assert_eq!(gx, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn spec_json_is_tagged() {
        let s = LayerSpec::Activation { function: Activation::Relu };
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["kind"], "activation");
        assert_eq!(v["function"], "relu");
        let back: LayerSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
