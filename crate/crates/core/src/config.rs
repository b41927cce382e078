//! Physical and protocol constants of the simulated network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deployment scenario.
///
/// - `S1`: orthogonal pilots, no shadowing.
/// - `S2`: pseudo-noise pilots (pilot contamination), no shadowing.
/// - `S3`: orthogonal pilots with log-normal shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
}

impl Scenario {
    pub fn orthogonal_pilots(self) -> bool {
        !matches!(self, Scenario::S2)
    }

    pub fn shadowing(self) -> bool {
        matches!(self, Scenario::S3)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::S1 => "S1",
            Scenario::S2 => "S2",
            Scenario::S3 => "S3",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scenario::S1),
            "S2" => Ok(Scenario::S2),
            "S3" => Ok(Scenario::S3),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    SumRate,
    MaxMin,
}

impl Objective {
    /// Short tag used in column headers (`SR` / `MR`).
    pub fn tag(self) -> &'static str {
        match self {
            Objective::SumRate => "SR",
            Objective::MaxMin => "MR",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum-rate" | "sumrate" | "sr" => Ok(Objective::SumRate),
            "max-min" | "maxmin" | "mr" => Ok(Objective::MaxMin),
            other => Err(Error::Config(format!("unknown objective {other:?}"))),
        }
    }
}

/// All constants of the uplink system. Lengths in meters, powers in mW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub area_side_m: f64,
    pub num_aps: usize,
    pub num_users: usize,
    pub antennas_per_ap: usize,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub ap_height_m: f64,
    pub user_height_m: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub tau_c: usize,
    pub tau_p: usize,
    /// Per-symbol pilot power `p_k`; the training energy is `tau_p * p_k`.
    pub pilot_power_mw: f64,
    /// Uplink data power cap shared by all users.
    pub p_max_mw: f64,
    /// Optional per-user caps overriding `p_max_mw`.
    pub p_max_per_user_mw: Option<Vec<f64>>,
    pub shadow_std_db: f64,
    /// `serving[k][m]` is true when AP `m` serves user `k`. `None` means every AP serves every user.
    pub serving: Option<Vec<Vec<bool>>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            area_side_m: 500.0,
            num_aps: 30,
            num_users: 5,
            antennas_per_ap: 4,
            bandwidth_hz: 20.0e6,
            carrier_hz: 1.9e9,
            ap_height_m: 15.0,
            user_height_m: 1.65,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            tau_c: 200,
            tau_p: 8,
            pilot_power_mw: 100.0,
            p_max_mw: 100.0,
            p_max_per_user_mw: None,
            shadow_std_db: 8.0,
            serving: None,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.area_side_m > 0.0) {
            return bad("area_side_m must be positive");
        }
        if self.num_aps == 0 || self.num_users == 0 || self.antennas_per_ap == 0 {
            return bad("num_aps, num_users and antennas_per_ap must be at least 1");
        }
        if self.tau_p == 0 {
            return bad("tau_p must be at least 1");
        }
        if self.tau_c <= self.tau_p {
            return bad("tau_c must exceed tau_p");
        }
        if !(self.bandwidth_hz > 0.0 && self.carrier_hz > 0.0) {
            return bad("bandwidth and carrier must be positive");
        }
        if !(self.ap_height_m > 0.0 && self.user_height_m > 0.0) {
            return bad("antenna heights must be positive");
        }
        if !(self.pilot_power_mw > 0.0) {
            return bad("pilot_power_mw must be positive");
        }
        if !(self.p_max_mw > 0.0) {
            return bad("p_max_mw must be positive");
        }
        if let Some(caps) = &self.p_max_per_user_mw {
            if caps.len() != self.num_users {
                return bad("p_max_per_user_mw must list one cap per user");
            }
            if caps.iter().any(|&p| !(p > 0.0)) {
                return bad("per-user caps must be positive");
            }
        }
        if !(self.shadow_std_db >= 0.0) {
            return bad("shadow_std_db must be non-negative");
        }
        if let Some(serving) = &self.serving {
            if serving.len() != self.num_users || serving.iter().any(|r| r.len() != self.num_aps) {
                return bad("serving mask must be num_users x num_aps");
            }
            if serving.iter().any(|r| !r.iter().any(|&s| s)) {
                return bad("every user must be served by at least one AP");
            }
        }
        Ok(())
    }

    /// Uplink data length `(tau_c - tau_p) / 2`.
    pub fn tau_u(&self) -> f64 {
        (self.tau_c - self.tau_p) as f64 / 2.0
    }

    /// Training energy `eta_k = tau_p * p_k` (identical for all users).
    pub fn train_energy_mw(&self) -> f64 {
        self.tau_p as f64 * self.pilot_power_mw
    }

    /// Thermal noise power over the band, including the receiver noise figure, in mW.
    pub fn noise_power_mw(&self) -> f64 {
        let dbm = self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db;
        10f64.powf(dbm / 10.0)
    }

    pub fn height_gap_m(&self) -> f64 {
        (self.ap_height_m - self.user_height_m).abs()
    }

    /// Rate prefactor `tau_u / tau_c * W` in bit/s per bit/s/Hz.
    pub fn rate_prefactor(&self) -> f64 {
        self.tau_u() / self.tau_c as f64 * self.bandwidth_hz
    }

    pub fn p_max(&self, user: usize) -> f64 {
        match &self.p_max_per_user_mw {
            Some(caps) => caps[user],
            None => self.p_max_mw,
        }
    }

    pub fn p_max_vec(&self) -> Vec<f64> {
        (0..self.num_users).map(|k| self.p_max(k)).collect()
    }

    pub fn serves(&self, user: usize, ap: usize) -> bool {
        self.serving.as_ref().is_none_or(|s| s[user][ap])
    }
}
