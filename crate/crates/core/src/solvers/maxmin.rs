use serde::{Deserialize, Serialize};

use super::{PowerVector, SolverReport};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::system::{uplink_rate, SinrCoefficients};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxMinSettings {
    /// Relative width of the final SINR bracket.
    pub tol: f64,
    pub max_bisections: usize,
    pub max_fixed_point_iters: usize,
    /// Fixed-point stopping threshold on the sup-norm step, relative to the largest cap.
    pub fixed_point_tol: f64,
    /// Relative slack on the SINR target when declaring feasibility.
    pub sinr_slack: f64,
}

impl Default for MaxMinSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_bisections: 200,
            max_fixed_point_iters: 10_000,
            fixed_point_tol: 1e-12,
            sinr_slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Componentwise-minimal powers reaching the target (or the last iterate when infeasible).
    pub eta: PowerVector,
    pub iterations: usize,
}

/// Can every user reach SINR `target` within its power cap?
///
/// Iterates the standard interference map
/// `eta_k <- min(cap_k, t (sum_j b_kj eta_j + c_k) / a_k)` from zero. The
/// uncapped iterates increase monotonically towards the minimal feasible point,
/// so the first time an uncapped update exceeds a cap the target is proven
/// infeasible.
pub fn maxmin_feasibility(
    target: f64,
    coeffs: &SinrCoefficients,
    caps: &[f64],
    settings: &MaxMinSettings,
) -> Feasibility {
    let k_users = coeffs.num_users();
    let mut eta = vec![0.0; k_users];
    if target <= 0.0 {
        return Feasibility { feasible: true, eta: PowerVector(eta), iterations: 0 };
    }
    let cap_scale = caps.iter().cloned().fold(0.0, f64::max);
    let mut next = vec![0.0; k_users];
    let mut iterations = 0;
    let mut overshoot = false;
    while iterations < settings.max_fixed_point_iters {
        iterations += 1;
        let mut step: f64 = 0.0;
        for k in 0..k_users {
            let raw = target * coeffs.interference(&eta, k) / coeffs.a[k];
            if raw > caps[k] * (1.0 + settings.sinr_slack) {
                overshoot = true;
            }
            next[k] = raw.min(caps[k]);
            debug_assert!(next[k] >= eta[k] * (1.0 - 1e-12), "interference map must be monotone");
            step = step.max((next[k] - eta[k]).abs());
        }
        std::mem::swap(&mut eta, &mut next);
        if overshoot || step < settings.fixed_point_tol * cap_scale {
            break;
        }
    }
    let feasible = !overshoot
        && coeffs
            .sinr(&eta)
            .iter()
            .all(|&s| s >= target * (1.0 - settings.sinr_slack));
    Feasibility { feasible, eta: PowerVector(eta), iterations }
}

/// Max-min fair powers by bisection on the common SINR target.
///
/// The bracket starts at `[0, min_k cap_k a_k / c_k]` (the upper end is the
/// interference-free limit, never strictly feasible). Returns the minimal-power
/// vector at the best feasible target, so all users end with equal SINR.
pub fn solve_maxmin(
    coeffs: &SinrCoefficients,
    config: &SystemConfig,
    settings: &MaxMinSettings,
) -> Result<SolverReport> {
    if !(settings.tol > 0.0) {
        return Err(Error::Config("max-min tolerance must be positive".into()));
    }
    if let Some(user) = coeffs.a.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::DegenerateCoefficients { user });
    }
    let caps = config.p_max_vec();
    if caps.len() != coeffs.num_users() {
        return Err(Error::dim("power caps", coeffs.num_users(), caps.len()));
    }
    let min_rate = |eta: &[f64]| {
        uplink_rate(eta, coeffs, config)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    };

    let mut lo = 0.0;
    let mut hi = (0..caps.len())
        .map(|k| caps[k] * coeffs.a[k] / coeffs.c[k])
        .fold(f64::INFINITY, f64::min);
    let mut best = vec![0.0; caps.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    while hi - lo > settings.tol * hi && iterations < settings.max_bisections {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let f = maxmin_feasibility(mid, coeffs, &caps, settings);
        if f.feasible {
            lo = mid;
            best = f.eta.0;
        } else {
            hi = mid;
        }
        trace.push(config.rate_prefactor() * (1.0 + lo).log2());
    }
    let converged = hi - lo <= settings.tol * hi;

    let objective = min_rate(&best);
    trace.push(objective);
    Ok(SolverReport {
        powers: PowerVector(best),
        objective,
        iterations,
        converged,
        objective_trace: trace,
    })
}
