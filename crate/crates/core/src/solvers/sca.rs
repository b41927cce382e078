//! Sum-rate maximization by successive lower-bound maximization.
//!
//! With `T_k(eta) = a_k eta_k + I_k(eta)` and `I_k(eta) = sum_j b_kj eta_j + c_k`
//! the sum rate is `sum_k log T_k - log I_k`, a difference of concave functions.
//! Linearizing `log I_k` at the current point gives a concave global minorant
//! that is tight there; maximizing it over the power box and repeating yields a
//! monotone ascent.

use serde::{Deserialize, Serialize};

use super::{uniform_allocation, PowerVector, SolverReport};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::system::SinrCoefficients;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaSettings {
    /// Relative objective change that stops the outer loop.
    pub tol: f64,
    pub max_outer: usize,
    /// Sup-norm of the projected gradient (normalized powers) that stops the inner ascent.
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_outer: 1000,
            inner_tol: 1e-8,
            max_inner: 10_000,
            armijo: 1e-4,
        }
    }
}

/// The problem in normalized powers `x_k = eta_k / cap_k in [0, 1]`.
struct Scaled {
    a: Vec<f64>,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl Scaled {
    fn new(co: &SinrCoefficients, caps: &[f64]) -> Self {
        let k_users = co.num_users();
        Self {
            a: (0..k_users).map(|k| co.a[k] * caps[k]).collect(),
            b: (0..k_users)
                .map(|k| (0..k_users).map(|j| co.b[[k, j]] * caps[j]).collect())
                .collect(),
            c: co.c.clone(),
        }
    }

    fn interference(&self, x: &[f64], k: usize) -> f64 {
        self.b[k].iter().zip(x).map(|(b, v)| b * v).sum::<f64>() + self.c[k]
    }

    /// Sum of `ln(1 + SINR_k)` (nats per channel use).
    fn objective(&self, x: &[f64]) -> f64 {
        (0..self.a.len())
            .map(|k| (self.a[k] * x[k] / self.interference(x, k)).ln_1p())
            .sum()
    }
}

fn project(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn sup_norm(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes the concave surrogate around `x0` by projected gradient ascent
/// with Armijo backtracking. Returns the new point and the step length to reuse.
fn maximize_surrogate(p: &Scaled, x0: &[f64], step0: f64, s: &ScaSettings) -> (Vec<f64>, f64) {
    let k_users = x0.len();
    let inv_i0: Vec<f64> = (0..k_users).map(|k| 1.0 / p.interference(x0, k)).collect();
    // Linear part of the gradient from the linearized subtracted term.
    let lin: Vec<f64> = (0..k_users)
        .map(|j| (0..k_users).map(|k| p.b[k][j] * inv_i0[k]).sum())
        .collect();
    let totals = |x: &[f64]| -> Vec<f64> {
        (0..k_users).map(|k| p.a[k] * x[k] + p.interference(x, k)).collect()
    };
    let gradient = |t: &[f64]| -> Vec<f64> {
        (0..k_users)
            .map(|j| {
                let own = p.a[j] / t[j];
                let cross: f64 = (0..k_users).map(|k| p.b[k][j] / t[k]).sum();
                own + cross - lin[j]
            })
            .collect()
    };
    // Surrogate increase from x to x + d, computed in difference form.
    let increase = |t: &[f64], d: &[f64]| -> f64 {
        (0..k_users)
            .map(|k| {
                let db: f64 = p.b[k].iter().zip(d).map(|(b, v)| b * v).sum();
                ((p.a[k] * d[k] + db) / t[k]).ln_1p() - db * inv_i0[k]
            })
            .sum()
    };

    let mut x = x0.to_vec();
    let mut t = totals(&x);
    let mut g = gradient(&t);
    let mut step = step0;
    let mut d = vec![0.0; k_users];
    for _ in 0..s.max_inner {
        if sup_norm((0..k_users).map(|k| project(x[k] + g[k]) - x[k])) < s.inner_tol {
            break;
        }
        let mut trial = step;
        let accepted = loop {
            for k in 0..k_users {
                d[k] = project(x[k] + trial * g[k]) - x[k];
            }
            let predicted: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if predicted <= 0.0 || sup_norm(d.iter().copied()) == 0.0 {
                break false;
            }
            if increase(&t, &d) >= s.armijo * predicted {
                break true;
            }
            trial *= 0.5;
            if trial < 1e-30 {
                break false;
            }
        };
        if !accepted {
            break;
        }
        let x_new: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let t_new = totals(&x_new);
        let g_new = gradient(&t_new);
        // Barzilai-Borwein estimate of the next trial step (concave: -dx.dg > 0).
        let dx_dx: f64 = d.iter().map(|v| v * v).sum();
        let dx_dg: f64 = d.iter().zip(g_new.iter().zip(&g)).map(|(a, (gn, go))| a * (gn - go)).sum();
        step = if dx_dg < 0.0 { (dx_dx / -dx_dg).clamp(1e-12, 1e12) } else { (trial * 2.0).min(1e12) };
        x = x_new;
        t = t_new;
        g = g_new;
    }
    (x, step)
}

/// Sum-rate maximizing powers, starting from the uniform allocation.
pub fn solve_sumrate_sca(
    coeffs: &SinrCoefficients,
    config: &SystemConfig,
    settings: &ScaSettings,
) -> Result<SolverReport> {
    if !(settings.tol > 0.0) {
        return Err(Error::Config("SCA tolerance must be positive".into()));
    }
    if let Some(user) = coeffs.a.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::DegenerateCoefficients { user });
    }
    let caps = config.p_max_vec();
    if caps.len() != coeffs.num_users() {
        return Err(Error::dim("power caps", coeffs.num_users(), caps.len()));
    }
    let to_bits = config.rate_prefactor() / std::f64::consts::LN_2;
    let problem = Scaled::new(coeffs, &caps);

    let mut x: Vec<f64> = uniform_allocation(config).iter().zip(&caps).map(|(e, p)| e / p).collect();
    let mut value = problem.objective(&x);
    let mut trace = vec![value * to_bits];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_outer {
        iterations += 1;
        let (x_new, next_step) = maximize_surrogate(&problem, &x, step, settings);
        step = next_step;
        let new_value = problem.objective(&x_new);
        let change = (new_value - value).abs();
        if new_value >= value {
            x = x_new;
            value = new_value;
        }
        trace.push(value * to_bits);
        if change <= settings.tol * value.abs() {
            converged = true;
            break;
        }
    }
    let powers: Vec<f64> = x.iter().zip(&caps).map(|(v, p)| (v * p).clamp(0.0, *p)).collect();
    Ok(SolverReport {
        powers: PowerVector(powers),
        objective: value * to_bits,
        iterations,
        converged,
        objective_trace: trace,
    })
}
