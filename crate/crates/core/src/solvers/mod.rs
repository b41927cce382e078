//! Optimal and baseline uplink power allocations.

mod maxmin;
mod sca;

use serde::{Deserialize, Serialize};

pub use maxmin::{maxmin_feasibility, solve_maxmin, Feasibility, MaxMinSettings};
pub use sca::{solve_sumrate_sca, ScaSettings};

use crate::config::SystemConfig;

/// Uplink transmit powers in mW, one per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerVector(pub Vec<f64>);

impl PowerVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when `0 <= eta_k <= cap_k` for every user.
    pub fn is_feasible(&self, caps: &[f64]) -> bool {
        self.0.len() == caps.len() && self.0.iter().zip(caps).all(|(&e, &p)| (0.0..=p).contains(&e))
    }
}

impl std::ops::Deref for PowerVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub powers: PowerVector,
    /// Sum rate or minimum rate in bit/s, depending on the solver.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

/// Every user at its own cap.
pub fn uniform_allocation(config: &SystemConfig) -> PowerVector {
    PowerVector(config.p_max_vec())
}
