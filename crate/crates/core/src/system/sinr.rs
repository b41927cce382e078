use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::realization::NetworkRealization;
use crate::config::SystemConfig;

/// Affine-fractional form of the use-and-then-forget SINR:
/// `SINR_k(eta) = eta_k a_k / (sum_j eta_j b[k][j] + c_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrCoefficients {
    pub a: Vec<f64>,
    pub b: Array2<f64>,
    pub c: Vec<f64>,
}

impl SinrCoefficients {
    pub fn from_realization(r: &NetworkRealization, config: &SystemConfig) -> Self {
        let (k_users, m_aps) = r.beta.dim();
        let noise = config.noise_power_mw();
        let serving = |k: usize| (0..m_aps).filter(move |&m| config.serves(k, m));
        let mut a = vec![0.0; k_users];
        let mut c = vec![0.0; k_users];
        let mut b = Array2::zeros((k_users, k_users));
        for k in 0..k_users {
            let gamma_sum: f64 = serving(k).map(|m| r.gamma[[k, m]]).sum();
            a[k] = gamma_sum * gamma_sum;
            c[k] = noise * gamma_sum;
            for j in 0..k_users {
                let noncoherent: f64 = serving(k).map(|m| r.beta[[j, m]] * r.gamma[[k, m]]).sum();
                let coherent = if j == k {
                    0.0
                } else {
                    let s: f64 = serving(k).map(|m| r.gamma[[k, m]] * r.beta[[j, m]] / r.beta[[k, m]]).sum();
                    s * s * r.gram[[j, k]]
                };
                b[[k, j]] = noncoherent + coherent;
            }
        }
        Self { a, b, c }
    }

    pub fn num_users(&self) -> usize {
        self.a.len()
    }

    pub fn interference(&self, eta: &[f64], k: usize) -> f64 {
        self.b.row(k).iter().zip(eta).map(|(b, e)| b * e).sum::<f64>() + self.c[k]
    }

    pub fn sinr(&self, eta: &[f64]) -> Vec<f64> {
        (0..self.num_users())
            .map(|k| eta[k] * self.a[k] / self.interference(eta, k))
            .collect()
    }
}

/// Per-user uplink rates in bit/s.
pub fn uplink_rate(eta: &[f64], coeffs: &SinrCoefficients, config: &SystemConfig) -> Vec<f64> {
    let pre = config.rate_prefactor();
    coeffs.sinr(eta).into_iter().map(|s| pre * s.log2_1p()).collect()
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// SINR evaluated term by term from the closed-form rate expression, without
/// the `(a, B, c)` regrouping. Used to cross-check [`SinrCoefficients`].
pub fn sinr_direct(eta: &[f64], r: &NetworkRealization, config: &SystemConfig) -> Vec<f64> {
    let (k_users, m_aps) = r.beta.dim();
    let noise = config.noise_power_mw();
    (0..k_users)
        .map(|k| {
            let served: Vec<usize> = (0..m_aps).filter(|&m| config.serves(k, m)).collect();
            let useful: f64 = served.iter().map(|&m| r.gamma[[k, m]]).sum::<f64>().powi(2);
            let mut denom = 0.0;
            for j in 0..k_users {
                let mut s = 0.0;
                for &m in &served {
                    s += r.beta[[j, m]] * r.gamma[[k, m]];
                }
                denom += eta[j] * s;
            }
            for j in (0..k_users).filter(|&j| j != k) {
                let mut s = 0.0;
                for &m in &served {
                    s += r.gamma[[k, m]] * (r.beta[[j, m]] / r.beta[[k, m]]);
                }
                let overlap = r.pilots.column(j).dot(&r.pilots.column(k));
                denom += eta[j] * s * s * overlap.abs().powi(2);
            }
            denom += noise * served.iter().map(|&m| r.gamma[[k, m]]).sum::<f64>();
            eta[k] * useful / denom
        })
        .collect()
}
