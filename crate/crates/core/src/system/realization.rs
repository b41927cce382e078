use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{draw_positions, draw_shadowing, large_scale_coefficients, Point};
use super::pilots::{generate_pilots, gram_sq};
use crate::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};

/// One drop of the network together with every derived large-scale quantity.
///
/// Matrices indexed `[user, ap]` are `K x M`; `pilots` is `tau_p x K`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub ap_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    pub shadow: Array2<f64>,
    pub beta: Array2<f64>,
    pub pilots: Array2<f64>,
    /// `|phi_i^H phi_k|^2`, `K x K`.
    pub gram: Array2<f64>,
    pub alpha: Array2<f64>,
    pub gamma: Array2<f64>,
    pub ap_seed: Option<u64>,
    pub instance_seed: Option<u64>,
}

/// LMMSE scalar `alpha[k][m] = sqrt(eta_k) beta_km / (sum_i eta_i beta_im |phi_i^H phi_k|^2 + sigma^2)`.
pub fn lmmse_alpha(beta: &Array2<f64>, pilots: &Array2<f64>, config: &SystemConfig) -> Array2<f64> {
    let gram = gram_sq(pilots);
    alpha_with_gram(beta, &gram, config)
}

fn alpha_with_gram(beta: &Array2<f64>, gram: &Array2<f64>, config: &SystemConfig) -> Array2<f64> {
    let (k, m) = beta.dim();
    let eta = config.train_energy_mw();
    let noise = config.noise_power_mw();
    Array2::from_shape_fn((k, m), |(ki, mi)| {
        let denom: f64 = (0..k).map(|i| eta * beta[[i, mi]] * gram[[i, ki]]).sum::<f64>() + noise;
        eta.sqrt() * beta[[ki, mi]] / denom
    })
}

/// `gamma[k][m] = sqrt(eta_k) N_AP alpha_km beta_km`.
pub fn gamma_from_alpha(alpha: &Array2<f64>, beta: &Array2<f64>, config: &SystemConfig) -> Array2<f64> {
    let scale = config.train_energy_mw().sqrt() * config.antennas_per_ap as f64;
    alpha * beta * scale
}

impl NetworkRealization {
    pub fn new(
        config: &SystemConfig,
        ap_positions: Vec<Point>,
        user_positions: Vec<Point>,
        shadow: Array2<f64>,
        pilots: Array2<f64>,
    ) -> Result<Self> {
        config.validate()?;
        if ap_positions.len() != config.num_aps {
            return Err(Error::dim("AP positions", config.num_aps, ap_positions.len()));
        }
        if user_positions.len() != config.num_users {
            return Err(Error::dim("user positions", config.num_users, user_positions.len()));
        }
        if pilots.dim() != (config.tau_p, config.num_users) {
            return Err(Error::dim("pilot book", config.tau_p * config.num_users, pilots.len()));
        }
        let beta = large_scale_coefficients(&ap_positions, &user_positions, &shadow, config)?;
        Self::from_beta(config, ap_positions, user_positions, shadow, beta, pilots)
    }

    /// Builds a realization from an explicit large-scale fading matrix.
    pub fn from_beta(
        config: &SystemConfig,
        ap_positions: Vec<Point>,
        user_positions: Vec<Point>,
        shadow: Array2<f64>,
        beta: Array2<f64>,
        pilots: Array2<f64>,
    ) -> Result<Self> {
        let dims = (config.num_users, config.num_aps);
        if beta.dim() != dims {
            return Err(Error::dim("beta", dims.0 * dims.1, beta.len()));
        }
        if beta.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::Numerical("large-scale coefficients must be positive and finite".into()));
        }
        let gram = gram_sq(&pilots);
        let alpha = alpha_with_gram(&beta, &gram, config);
        let gamma = gamma_from_alpha(&alpha, &beta, config);
        Ok(Self {
            ap_positions,
            user_positions,
            shadow,
            beta,
            pilots,
            gram,
            alpha,
            gamma,
            ap_seed: None,
            instance_seed: None,
        })
    }

    /// Draws APs, users and (for shadowed scenarios) shadowing from one generator.
    pub fn random<R: Rng + ?Sized>(config: &SystemConfig, scenario: Scenario, rng: &mut R) -> Result<Self> {
        let aps = draw_positions(config.num_aps, config, rng);
        Self::random_users(config, scenario, aps, rng)
    }

    /// Draws users and shadowing for a fixed AP layout.
    pub fn random_users<R: Rng + ?Sized>(
        config: &SystemConfig,
        scenario: Scenario,
        ap_positions: Vec<Point>,
        rng: &mut R,
    ) -> Result<Self> {
        let users = draw_positions(config.num_users, config, rng);
        let shadow = if scenario.shadowing() {
            draw_shadowing(config.num_users, config.num_aps, rng)
        } else {
            Array2::zeros((config.num_users, config.num_aps))
        };
        let pilots = generate_pilots(scenario, config.tau_p, config.num_users)?;
        Self::new(config, ap_positions, users, shadow, pilots)
    }

    pub fn num_users(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_aps(&self) -> usize {
        self.beta.ncols()
    }

    pub fn to_doc(&self) -> RealizationDoc {
        let rows = |a: &Array2<f64>| a.outer_iter().map(|r| r.to_vec()).collect();
        RealizationDoc {
            ap_positions: self.ap_positions.clone(),
            user_positions: self.user_positions.clone(),
            shadow: rows(&self.shadow),
            beta: rows(&self.beta),
            gram: self.pilots.t().dot(&self.pilots).outer_iter().map(|r| r.to_vec()).collect(),
            ap_seed: self.ap_seed,
            instance_seed: self.instance_seed,
        }
    }
}

/// JSON debugging view of a realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationDoc {
    pub ap_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    pub shadow: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    /// Pilot Gram matrix `Phi^H Phi`.
    pub gram: Vec<Vec<f64>>,
    pub ap_seed: Option<u64>,
    pub instance_seed: Option<u64>,
}
