use ndarray::{ArrayViewMutD, ArrayViewD, Zip};
use serde::{Deserialize, Serialize};

use super::model::{Gradients, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NadamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for NadamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, epsilon: 1e-7 }
    }
}

/// First and second moment estimates for every parameter, plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct NadamState {
    pub params: NadamParams,
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
}

fn update(
    theta: ArrayViewMutD<f64>,
    g: ArrayViewD<f64>,
    m: ArrayViewMutD<f64>,
    v: ArrayViewMutD<f64>,
    lr: f64,
    p: &NadamParams,
    t: u64,
) {
    let (b1, b2) = (p.beta1, p.beta2);
    let c1 = 1.0 - b1.powi(t as i32);
    let c2 = 1.0 - b2.powi(t as i32);
    Zip::from(theta).and(g).and(m).and(v).for_each(|th, &g, m, v| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let g_hat = g / c1;
        let v_hat = *v / c2;
        *th -= lr * (b1 * m_hat + (1.0 - b1) * g_hat) / (v_hat.sqrt() + p.epsilon);
    });
}

impl NadamState {
    pub fn new(model: &MlpModel, params: NadamParams) -> Self {
        Self {
            params,
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            t: 0,
        }
    }

    /// One Nesterov-accelerated Adam step on every weight and bias.
    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64) {
        self.t += 1;
        let t = self.t;
        let p = self.params;
        for (l, layer) in model.layers.iter_mut().enumerate() {
            update(
                layer.weights.view_mut().into_dyn(),
                grads.weights[l].view().into_dyn(),
                self.m.weights[l].view_mut().into_dyn(),
                self.v.weights[l].view_mut().into_dyn(),
                lr,
                &p,
                t,
            );
            update(
                layer.bias.view_mut().into_dyn(),
                grads.bias[l].view().into_dyn(),
                self.m.bias[l].view_mut().into_dyn(),
                self.v.bias[l].view_mut().into_dyn(),
                lr,
                &p,
                t,
            );
        }
    }
}
