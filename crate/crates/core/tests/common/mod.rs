//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use cellfree::neural::{loss_and_grad, loss_relative_mse, Gradients, LossKind, MlpModel};
use cellfree::rng::seeded;
use cellfree::system::uplink_rate;
use cellfree::{NetworkRealization, Scenario, SinrCoefficients, SystemConfig};
use ndarray::Array2;

/// Two users, three APs, everything else at the defaults.
pub fn tiny_config() -> SystemConfig {
    SystemConfig { num_aps: 3, num_users: 2, ..Default::default() }
}

pub fn tiny_instance(seed: u64) -> SinrCoefficients {
    let cfg = tiny_config();
    let r = NetworkRealization::random(&cfg, Scenario::S1, &mut seeded(seed)).unwrap();
    SinrCoefficients::from_realization(&r, &cfg)
}

/// Best sum rate and best minimum rate over an `n x n` grid of `[0, P]^2`.
pub fn grid_oracle(coeffs: &SinrCoefficients, cfg: &SystemConfig, n: usize) -> (f64, f64) {
    let (p0, p1) = (cfg.p_max(0), cfg.p_max(1));
    let mut best_sum: f64 = 0.0;
    let mut best_min: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let eta = [p0 * i as f64 / (n - 1) as f64, p1 * j as f64 / (n - 1) as f64];
            let r = uplink_rate(&eta, coeffs, cfg);
            best_sum = best_sum.max(r[0] + r[1]);
            best_min = best_min.max(r[0].min(r[1]));
        }
    }
    (best_sum, best_min)
}

/// Largest relative disagreement between backpropagated and central-difference
/// gradients over every weight and bias.
pub fn max_gradient_error(model: &MlpModel, x: &Array2<f64>, y: &Array2<f64>, h: f64) -> f64 {
    let kind = LossKind::CapNormalized;
    let tape = model.forward_tape(x.view()).unwrap();
    let (_, d_out) = loss_and_grad(tape.output.view(), y.view(), kind).unwrap();
    let mut grads = Gradients::zeros_like(model);
    model.backward(&tape, d_out, &mut grads);

    let loss_at = |m: &MlpModel| loss_relative_mse(m.forward_batch(x.view()).unwrap().view(), y.view(), kind).unwrap();
    let mut worst: f64 = 0.0;
    for li in 0..model.layers.len() {
        let (rows, cols) = model.layers[li].weights.dim();
        let slots = (0..rows).flat_map(|r| (0..cols).map(move |c| Some((r, c)))).chain((0..cols).map(|_| None));
        for (n, slot) in slots.enumerate() {
            let analytic = match slot {
                Some(rc) => grads.weights[li][rc],
                None => grads.bias[li][n - rows * cols],
            };
            let shifted = |delta: f64| {
                let mut m = model.clone();
                match slot {
                    Some(rc) => m.layers[li].weights[rc] += delta,
                    None => m.layers[li].bias[n - rows * cols] += delta,
                }
                loss_at(&m)
            };
            let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            let scale = numeric.abs().max(analytic.abs());
            if scale > 0.0 {
                worst = worst.max((numeric - analytic).abs() / scale);
            }
        }
    }
    worst
}
