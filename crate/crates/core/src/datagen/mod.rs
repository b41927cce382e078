//! Seeded datasets of (network input, optimal normalized powers).
//!
//! A dataset directory holds `manifest.json` and `train.bin`, `val.bin`,
//! `test.bin`. Each `.bin` file is a flat run of little-endian `f64` records
//! `[input | target]` whose length is fixed by the manifest. Sample `i` (global
//! index across the three splits, in train/val/test order) is generated from a
//! seed derived from the master seed and `i` alone, so records can be rebuilt
//! independently.

mod io;

use serde::{Deserialize, Serialize};

pub use io::{load_dataset, load_manifest, load_split, Dataset, DatasetManifest, DroppedSample, SplitData};

use crate::config::{Objective, Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, label, seeded};
use crate::solvers::{solve_maxmin, solve_sumrate_sca, MaxMinSettings, ScaSettings, SolverReport};
use crate::system::{draw_positions, NetworkRealization, Point, SinrCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn file_name(self) -> &'static str {
        match self {
            Split::Train => "train.bin",
            Split::Val => "val.bin",
            Split::Test => "test.bin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub objective: Objective,
    pub system: SystemConfig,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub master_seed: u64,
    /// Draw a fresh AP layout for every sample instead of one per dataset.
    pub resample_aps: bool,
    pub sca: ScaSettings,
    pub maxmin: MaxMinSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::S1,
            objective: Objective::SumRate,
            system: SystemConfig::default(),
            n_train: 18_000,
            n_val: 2_000,
            n_test: 1_000,
            master_seed: 1,
            resample_aps: false,
            sca: ScaSettings::default(),
            maxmin: MaxMinSettings::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.scenario.orthogonal_pilots() && self.system.num_users > self.system.tau_p {
            return Err(Error::PilotLength {
                num_users: self.system.num_users,
                tau_p: self.system.tau_p,
            });
        }
        if self.n_train == 0 || self.n_val == 0 {
            return Err(Error::Config("n_train and n_val must be positive".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.n_train + self.n_val + self.n_test
    }

    pub fn split_range(&self, split: Split) -> std::ops::Range<u64> {
        let (a, b, c) = (self.n_train as u64, self.n_val as u64, self.n_test as u64);
        match split {
            Split::Train => 0..a,
            Split::Val => a..a + b,
            Split::Test => a + b..a + b + c,
        }
    }

    pub fn input_dim(&self) -> usize {
        input_dim(self.scenario, &self.system)
    }

    pub fn ap_seed(&self) -> u64 {
        derive_seed(self.master_seed, label::AP_LAYOUT, 0)
    }

    pub fn instance_seed(&self, index: u64) -> u64 {
        derive_seed(self.master_seed, label::INSTANCE, index)
    }

    /// The dataset-wide AP layout.
    pub fn ap_layout(&self) -> Vec<Point> {
        draw_positions(self.system.num_aps, &self.system, &mut seeded(self.ap_seed()))
    }
}

/// Width of the network input: user coordinates for S1/S2, the fading matrix for S3.
pub fn input_dim(scenario: Scenario, system: &SystemConfig) -> usize {
    if scenario.shadowing() {
        system.num_users * system.num_aps
    } else {
        2 * system.num_users
    }
}

/// Unscaled features: coordinates divided by the area side (S1/S2) or
/// `10 log10(beta)` row-major by user (S3).
pub fn raw_features(r: &NetworkRealization, scenario: Scenario, system: &SystemConfig) -> Vec<f64> {
    if scenario.shadowing() {
        r.beta.iter().map(|b| 10.0 * b.log10()).collect()
    } else {
        r.user_positions
            .iter()
            .flat_map(|p| [p[0] / system.area_side_m, p[1] / system.area_side_m])
            .collect()
    }
}

/// Per-feature affine scaling `(x - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    /// Mean and (population) standard deviation of each column.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut n = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut sq: Vec<f64> = Vec::new();
        for row in rows {
            if sum.is_empty() {
                sum = vec![0.0; row.len()];
                sq = vec![0.0; row.len()];
            }
            for (i, v) in row.iter().enumerate() {
                sum[i] += v;
                sq[i] += v * v;
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::Empty("cannot standardize an empty split".into()));
        }
        let nf = n as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / nf - m * m).max(0.0).sqrt().max(1e-12))
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub input: Vec<f64>,
    /// Optimal powers divided by the caps.
    pub target: Vec<f64>,
    pub instance_seed: u64,
}

/// Realization for global sample `index`.
pub fn sample_realization(cfg: &ScenarioConfig, index: u64) -> Result<NetworkRealization> {
    let seed = cfg.instance_seed(index);
    let mut rng = seeded(seed);
    let (aps, ap_seed) = if cfg.resample_aps {
        (draw_positions(cfg.system.num_aps, &cfg.system, &mut rng), seed)
    } else {
        (cfg.ap_layout(), cfg.ap_seed())
    };
    let mut r = NetworkRealization::random_users(&cfg.system, cfg.scenario, aps, &mut rng)?;
    r.ap_seed = Some(ap_seed);
    r.instance_seed = Some(seed);
    Ok(r)
}

/// Runs the solver that matches the configured objective.
pub fn solve_for(cfg: &ScenarioConfig, objective: Objective, coeffs: &SinrCoefficients) -> Result<SolverReport> {
    match objective {
        Objective::SumRate => solve_sumrate_sca(coeffs, &cfg.system, &cfg.sca),
        Objective::MaxMin => solve_maxmin(coeffs, &cfg.system, &cfg.maxmin),
    }
}

/// Builds one record with unscaled input, or the reason it was dropped.
pub fn make_record(cfg: &ScenarioConfig, index: u64) -> Result<std::result::Result<DatasetRecord, String>> {
    let r = sample_realization(cfg, index)?;
    let coeffs = SinrCoefficients::from_realization(&r, &cfg.system);
    let report = match solve_for(cfg, cfg.objective, &coeffs) {
        Ok(rep) => rep,
        Err(e) if e.is_numerical() => return Ok(Err(e.to_string())),
        Err(e) => return Err(e),
    };
    if !report.converged {
        return Ok(Err(format!("solver stopped after {} iterations without converging", report.iterations)));
    }
    let caps = cfg.system.p_max_vec();
    let target = report.powers.iter().zip(&caps).map(|(e, p)| (e / p).clamp(0.0, 1.0)).collect();
    Ok(Ok(DatasetRecord {
        input: raw_features(&r, cfg.scenario, &cfg.system),
        target,
        instance_seed: r.instance_seed.unwrap_or_default(),
    }))
}

/// Largest tolerated fraction of dropped samples.
pub const MAX_DROP_FRACTION: f64 = 0.01;

/// Generates every split, fits input scaling on the training split (S3 only),
/// and writes the dataset directory.
pub fn build_dataset(
    cfg: &ScenarioConfig,
    out_dir: &std::path::Path,
    mut progress: impl FnMut(usize, usize),
) -> Result<DatasetManifest> {
    cfg.validate()?;
    let total = cfg.total();
    let mut kept: Vec<(Split, DatasetRecord)> = Vec::with_capacity(total);
    let mut dropped = Vec::new();
    for split in Split::ALL {
        for index in cfg.split_range(split) {
            match make_record(cfg, index)? {
                Ok(rec) => kept.push((split, rec)),
                Err(reason) => dropped.push(DroppedSample {
                    split,
                    index,
                    seed: cfg.instance_seed(index),
                    reason,
                }),
            }
            progress(index as usize + 1, total);
        }
    }
    if dropped.len() as f64 > MAX_DROP_FRACTION * total as f64 {
        return Err(Error::Numerical(format!(
            "{} of {total} samples dropped (limit {:.0}%)",
            dropped.len(),
            MAX_DROP_FRACTION * 100.0
        )));
    }

    let standardization = if cfg.scenario.shadowing() {
        let s = Standardization::fit(
            kept.iter()
                .filter(|(sp, _)| *sp == Split::Train)
                .map(|(_, r)| r.input.as_slice()),
        )?;
        for (_, rec) in &mut kept {
            s.apply(&mut rec.input);
        }
        Some(s)
    } else {
        None
    };
    io::write_dataset(cfg, out_dir, &kept, dropped, standardization)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(scenario: Scenario, objective: Objective) -> ScenarioConfig {
        ScenarioConfig {
            scenario,
            objective,
            n_train: 12,
            n_val: 4,
            n_test: 4,
            master_seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn scenario_structure_of_samples() {
        let c = tiny(Scenario::S1, Objective::SumRate);
        for i in 0..5 {
            let r = sample_realization(&c, i).unwrap();
            assert!(r.shadow.iter().all(|&z| z == 0.0));
            assert_eq!(r.pilots.t().dot(&r.pilots), ndarray::Array2::<f64>::eye(5));
            assert_eq!(r.ap_positions, c.ap_layout());
        }
        let s3 = tiny(Scenario::S3, Objective::SumRate);
        assert!(sample_realization(&s3, 0).unwrap().shadow.iter().any(|&z| z != 0.0));
        let a = sample_realization(&c, 3).unwrap();
        assert_eq!(a, sample_realization(&c, 3).unwrap());
        assert_ne!(a.user_positions, sample_realization(&c, 4).unwrap().user_positions);
    }

    #[test]
    fn resampled_aps_change_per_sample() {
        let c = ScenarioConfig { resample_aps: true, ..tiny(Scenario::S1, Objective::SumRate) };
        let a = sample_realization(&c, 0).unwrap();
        let b = sample_realization(&c, 1).unwrap();
        assert_ne!(a.ap_positions, b.ap_positions);
    }

    #[test]
    fn input_dimensions() {
        let sys = SystemConfig::default();
        assert_eq!(input_dim(Scenario::S1, &sys), 10);
        assert_eq!(input_dim(Scenario::S2, &sys), 10);
        assert_eq!(input_dim(Scenario::S3, &sys), 150);
        let rec = make_record(&tiny(Scenario::S3, Objective::MaxMin), 0).unwrap().unwrap();
        assert_eq!(rec.input.len(), 150);
        assert!(rec.target.iter().all(|&t| (0.0..=1.0).contains(&t)));
    }

    #[test]
    fn default_split_sizes() {
        let c = ScenarioConfig { n_train: 1_791_000, n_val: 199_000, n_test: 10_000, ..Default::default() };
        assert_eq!(c.n_train + c.n_val, 1_990_000);
        assert_eq!(c.split_range(Split::Test), 1_990_000..2_000_000);
        assert!((c.n_train as f64 / 1_990_000.0 - 0.9).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pilot_precondition() {
        let mut c = tiny(Scenario::S1, Objective::SumRate);
        c.system.num_users = 9;
        assert!(matches!(c.validate(), Err(Error::PilotLength { .. })));
    }

    #[test]
    fn standardization_fit_and_apply() {
        let rows = [vec![1.0, 10.0], vec![3.0, 10.0]];
        let s = Standardization::fit(rows.iter().map(|r| r.as_slice())).unwrap();
        assert_eq!(s.mean, vec![2.0, 10.0]);
        assert_eq!(s.std[0], 1.0);
        let mut x = vec![3.0, 10.0];
        s.apply(&mut x);
        assert_eq!(x, vec![1.0, 0.0]);
    }
}
