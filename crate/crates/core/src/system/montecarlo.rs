//! Monte-Carlo simulation of the pilot and data phases.
//!
//! Fast fading, pilot noise and data noise are drawn explicitly, the LMMSE
//! estimates are formed from the received pilot statistics and the soft
//! estimate terms are averaged. The sample means converge to the closed-form
//! quantities `gamma`, `(a, B, c)` and the use-and-then-forget SINR.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::realization::NetworkRealization;
use crate::config::SystemConfig;

/// One draw of true channels, their estimates and the data-phase noise.
///
/// Vectors are flattened `[(k * M + m) * N + n]`; noise is `[m * N + n]`.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    pub num_users: usize,
    pub num_aps: usize,
    pub antennas: usize,
    pub g: Vec<Complex64>,
    pub g_hat: Vec<Complex64>,
    pub noise: Vec<Complex64>,
    received: Vec<Complex64>,
}

fn cn<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_dim, im * std_per_dim)
}

impl ChannelDraw {
    pub fn new(num_users: usize, num_aps: usize, antennas: usize) -> Self {
        let len = num_users * num_aps * antennas;
        Self {
            num_users,
            num_aps,
            antennas,
            g: vec![Complex64::default(); len],
            g_hat: vec![Complex64::default(); len],
            noise: vec![Complex64::default(); num_aps * antennas],
            received: Vec::new(),
        }
    }

    fn idx(&self, k: usize, m: usize) -> usize {
        (k * self.num_aps + m) * self.antennas
    }

    pub fn channel(&self, k: usize, m: usize) -> &[Complex64] {
        let i = self.idx(k, m);
        &self.g[i..i + self.antennas]
    }

    pub fn estimate(&self, k: usize, m: usize) -> &[Complex64] {
        let i = self.idx(k, m);
        &self.g_hat[i..i + self.antennas]
    }

    /// Redraws everything for one coherence interval.
    pub fn resample<R: Rng + ?Sized>(&mut self, r: &NetworkRealization, config: &SystemConfig, rng: &mut R) {
        let (k_users, m_aps, n_ant) = (self.num_users, self.num_aps, self.antennas);
        let tau_p = r.pilots.nrows();
        let eta_sqrt = config.train_energy_mw().sqrt();
        let noise_std = (config.noise_power_mw() / 2.0).sqrt();

        for k in 0..k_users {
            for m in 0..m_aps {
                let s = (r.beta[[k, m]] / 2.0).sqrt();
                let i = self.idx(k, m);
                for v in &mut self.g[i..i + n_ant] {
                    *v = cn(rng, s);
                }
            }
        }
        // Received pilot block Y_m (N x tau_p), stored row-major per AP.
        self.received.resize(m_aps * n_ant * tau_p, Complex64::default());
        for m in 0..m_aps {
            for n in 0..n_ant {
                for t in 0..tau_p {
                    let mut y = cn(rng, noise_std);
                    for i in 0..k_users {
                        y += self.g[self.idx(i, m) + n] * (eta_sqrt * r.pilots[[t, i]]);
                    }
                    self.received[(m * n_ant + n) * tau_p + t] = y;
                }
            }
        }
        // y_hat_km = Y_m phi_k^*, g_hat = alpha y_hat.
        for k in 0..k_users {
            for m in 0..m_aps {
                let a = r.alpha[[k, m]];
                let base = self.idx(k, m);
                for n in 0..n_ant {
                    let row = &self.received[(m * n_ant + n) * tau_p..(m * n_ant + n + 1) * tau_p];
                    let y: Complex64 = row.iter().enumerate().map(|(t, v)| v * r.pilots[[t, k]]).sum();
                    self.g_hat[base + n] = y * a;
                }
            }
        }
        for v in &mut self.noise {
            *v = cn(rng, noise_std);
        }
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Sample averages over the simulated coherence intervals.
#[derive(Debug, Clone)]
pub struct McEstimates {
    pub trials: usize,
    /// Mean of `Re(g_hat_km^H g_km)`; converges to `gamma[k][m]`.
    pub cross_mean: Array2<f64>,
    /// Mean of `||g_hat_km||^2`; converges to `gamma[k][m]`.
    pub norm_mean: Array2<f64>,
    /// Mean of `sum_m g_hat_km^H g_km` (the deterministic useful-signal gain), converges to `sqrt(a_k)`.
    pub signal_mean: Vec<f64>,
    /// Mean of `|sum_m g_hat_km^H g_jm|^2`; converges to `b[k][j]` for `j != k` and to `a_k + b[k][k]` on the diagonal.
    pub cross_power: Array2<f64>,
    /// Mean of `|sum_m g_hat_km^H w_m|^2`; converges to `c_k`.
    pub noise_power: Vec<f64>,
    /// Use-and-then-forget SINR rebuilt from the sample moments at the requested powers.
    pub sinr: Vec<f64>,
}

impl McEstimates {
    /// Use-and-then-forget SINR at data powers `eta` from the sample moments.
    pub fn uatf_sinr(&self, eta: &[f64]) -> Vec<f64> {
        let k_users = self.signal_mean.len();
        (0..k_users)
            .map(|k| {
                let ds = self.signal_mean[k] * self.signal_mean[k];
                let total: f64 = (0..k_users).map(|j| eta[j] * self.cross_power[[k, j]]).sum();
                eta[k] * ds / (total - eta[k] * ds + self.noise_power[k])
            })
            .collect()
    }
}

pub fn monte_carlo_validate<R: Rng + ?Sized>(
    r: &NetworkRealization,
    config: &SystemConfig,
    eta: &[f64],
    n_trials: usize,
    rng: &mut R,
) -> McEstimates {
    assert!(n_trials >= 1, "at least one trial is required");
    let (k_users, m_aps) = r.beta.dim();
    let n_ant = config.antennas_per_ap;
    let mut draw = ChannelDraw::new(k_users, m_aps, n_ant);
    let mut cross = Array2::<f64>::zeros((k_users, m_aps));
    let mut norm = Array2::<f64>::zeros((k_users, m_aps));
    let mut signal = vec![Complex64::default(); k_users];
    let mut power = Array2::<f64>::zeros((k_users, k_users));
    let mut noise = vec![0.0; k_users];
    let mut sums = vec![Complex64::default(); k_users];

    for _ in 0..n_trials {
        draw.resample(r, config, rng);
        for k in 0..k_users {
            sums.iter_mut().for_each(|s| *s = Complex64::default());
            let mut noise_term = Complex64::default();
            for m in (0..m_aps).filter(|&m| config.serves(k, m)) {
                let est = draw.estimate(k, m);
                for (j, s) in sums.iter_mut().enumerate() {
                    *s += inner(est, draw.channel(j, m));
                }
                noise_term += inner(est, &draw.noise[m * n_ant..(m + 1) * n_ant]);
            }
            for m in 0..m_aps {
                let est = draw.estimate(k, m);
                cross[[k, m]] += inner(est, draw.channel(k, m)).re;
                norm[[k, m]] += est.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
            signal[k] += sums[k];
            for j in 0..k_users {
                power[[k, j]] += sums[j].norm_sqr();
            }
            noise[k] += noise_term.norm_sqr();
        }
    }
    let n = n_trials as f64;
    let mut est = McEstimates {
        trials: n_trials,
        cross_mean: cross / n,
        norm_mean: norm / n,
        signal_mean: signal.iter().map(|s| s.re / n).collect(),
        cross_power: power / n,
        noise_power: noise.iter().map(|v| v / n).collect(),
        sinr: Vec::new(),
    };
    est.sinr = est.uatf_sinr(eta);
    est
}
