use serde::{Deserialize, Serialize};

use crate::config::{Objective, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Elu,
    Relu,
    Linear,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Elu => {
                if v > 0.0 {
                    v
                } else {
                    v.exp_m1()
                }
            }
            Activation::Relu => v.max(0.0),
            Activation::Linear => v,
        }
    }

    /// Derivative in terms of the pre-activation `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    z.exp()
                }
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenLayer {
    pub width: usize,
    pub activation: Activation,
}

/// Input width, hidden stack, and a linear output layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpLayout {
    pub input_dim: usize,
    pub hidden: Vec<HiddenLayer>,
    pub output_dim: usize,
}

fn stack(widths: &[usize]) -> Vec<HiddenLayer> {
    widths
        .iter()
        .enumerate()
        .map(|(i, &width)| HiddenLayer {
            width,
            activation: if i == 0 { Activation::Elu } else { Activation::Relu },
        })
        .collect()
}

impl MlpLayout {
    /// 256 elu, then 128/64/32/16 relu. With 10 inputs and 5 outputs: 46,661 parameters.
    pub fn ann1(input_dim: usize, output_dim: usize) -> Self {
        Self { input_dim, hidden: stack(&[256, 128, 64, 32, 16]), output_dim }
    }

    /// 512 elu, then 256/128/64/32/16 relu. With 10 inputs and 5 outputs: 180,805 parameters.
    pub fn ann2(input_dim: usize, output_dim: usize) -> Self {
        Self { input_dim, hidden: stack(&[512, 256, 128, 64, 32, 16]), output_dim }
    }

    /// Same stack as [`MlpLayout::ann2`], sized for `K * M` fading inputs (150 -> 252,485 parameters).
    pub fn ann3(input_dim: usize, output_dim: usize) -> Self {
        Self::ann2(input_dim, output_dim)
    }

    /// ANN1 for sum-rate and ANN2 for max-min on position inputs; ANN3 whenever
    /// the input is the shadowed fading matrix.
    pub fn for_task(scenario: Scenario, objective: Objective, input_dim: usize, output_dim: usize) -> Self {
        match (scenario.shadowing(), objective) {
            (true, _) => Self::ann3(input_dim, output_dim),
            (false, Objective::SumRate) => Self::ann1(input_dim, output_dim),
            (false, Objective::MaxMin) => Self::ann2(input_dim, output_dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.iter().any(|h| h.width == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out, activation)` for every dense layer, output layer last.
    pub fn layers(&self) -> Vec<(usize, usize, Activation)> {
        let mut out = Vec::with_capacity(self.hidden.len() + 1);
        let mut fan_in = self.input_dim;
        for h in &self.hidden {
            out.push((fan_in, h.width, h.activation));
            fan_in = h.width;
        }
        out.push((fan_in, self.output_dim, Activation::Linear));
        out
    }

    pub fn layer_parameter_counts(&self) -> Vec<usize> {
        self.layers().iter().map(|&(i, o, _)| i * o + o).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_parameter_counts().iter().sum()
    }
}
