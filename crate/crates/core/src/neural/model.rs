use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use super::layout::{Activation, MlpLayout};
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `fan_in x fan_out`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layout: MlpLayout,
    pub layers: Vec<Dense>,
    pub init_seed: u64,
}

/// Glorot-uniform weights and zero biases.
pub fn init_mlp(layout: &MlpLayout, seed: u64) -> Result<MlpModel> {
    layout.validate()?;
    let mut rng = seeded(seed);
    let layers = layout
        .layers()
        .into_iter()
        .map(|(fan_in, fan_out, activation)| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-limit..limit));
            Dense { weights, bias: Array1::zeros(fan_out), activation }
        })
        .collect();
    Ok(MlpModel { layout: layout.clone(), layers, init_seed: seed })
}

/// Forward-pass intermediates kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Tape {
    /// Input to each layer; `inputs[0]` is the batch itself.
    pub inputs: Vec<Array2<f64>>,
    /// Pre-activations of each layer.
    pub pre: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub bias: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            weights: model.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            bias: model.layers.iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.bias.iter().flat_map(|b| b.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn affine(x: ArrayView2<f64>, layer: &Dense) -> Array2<f64> {
    let mut z = x.dot(&layer.weights);
    z += &layer.bias;
    z
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layout.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layout.output_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_batch(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::dim("network input", self.input_dim(), x.ncols()));
        }
        Ok(())
    }

    /// Batch inference (`n x input_dim` to `n x output_dim`).
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_batch(&x)?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            let mut z = affine(a.view(), layer);
            if layer.activation != Activation::Linear {
                z.mapv_inplace(|v| layer.activation.apply(v));
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(view)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_tape(&self, x: ArrayView2<f64>) -> Result<Tape> {
        self.check_batch(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for layer in &self.layers {
            let z = affine(a.view(), layer);
            let next = z.mapv(|v| layer.activation.apply(v));
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        Ok(Tape { inputs, pre, output: a })
    }

    /// Backpropagates `d_output` (gradient of the loss w.r.t. the network output) through a tape.
    pub fn backward(&self, tape: &Tape, d_output: Array2<f64>, grads: &mut Gradients) {
        let mut delta = d_output;
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if layer.activation != Activation::Linear {
                Zip::from(&mut delta)
                    .and(&tape.pre[l])
                    .for_each(|d, &z| *d *= layer.activation.derivative(z));
            }
            grads.weights[l] = tape.inputs[l].t().dot(&delta);
            grads.bias[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                delta = delta.dot(&layer.weights.t());
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}
