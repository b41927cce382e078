//! Comparison of power-control policies on a test split: per-user rate CDFs,
//! summary tables and training-curve reports.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::config::Objective;
use crate::datagen::{raw_features, sample_realization, Dataset, ScenarioConfig, Split};
use crate::error::{Error, Result};
use crate::neural::{EpochLog, MlpModel};
use crate::solvers::uniform_allocation;
use crate::system::{uplink_rate, SinrCoefficients};

/// Method labels of the five compared policies, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    SrMax,
    MrMax,
    SrMaxAnn,
    MrMaxAnn,
    Uni,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::SrMax, Method::MrMax, Method::SrMaxAnn, Method::MrMaxAnn, Method::Uni];

    pub fn label(self) -> &'static str {
        match self {
            Method::SrMax => "SR Max",
            Method::MrMax => "MR Max",
            Method::SrMaxAnn => "SR Max ANN",
            Method::MrMaxAnn => "MR Max ANN",
            Method::Uni => "Uni",
        }
    }

    pub fn optimal(objective: Objective) -> Self {
        match objective {
            Objective::SumRate => Method::SrMax,
            Objective::MaxMin => Method::MrMax,
        }
    }

    pub fn learned(objective: Objective) -> Self {
        match objective {
            Objective::SumRate => Method::SrMaxAnn,
            Objective::MaxMin => Method::MrMaxAnn,
        }
    }
}

/// Source of power vectors.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Solver(Objective),
    Model(&'a MlpModel),
    Uniform,
}

/// Test instances: the true SINR coefficients plus the network inputs as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub coeffs: Vec<SinrCoefficients>,
    pub inputs: Array2<f64>,
}

impl TestSet {
    /// Rebuilds the test realizations from their seeds and checks that they
    /// reproduce the stored inputs.
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        let cfg = &ds.manifest.config;
        let indices = ds.manifest.indices(Split::Test);
        if indices.is_empty() {
            return Err(Error::Empty("test split".into()));
        }
        let mut coeffs = Vec::with_capacity(indices.len());
        for (row, &index) in indices.iter().enumerate() {
            let r = sample_realization(cfg, index)?;
            let mut x = raw_features(&r, cfg.scenario, &cfg.system);
            if let Some(s) = &ds.manifest.standardization {
                s.apply(&mut x);
            }
            let stored = ds.test.inputs.row(row);
            if x.iter().zip(stored.iter()).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
                return Err(Error::Numerical(format!(
                    "test sample {index} does not reproduce its stored input"
                )));
            }
            coeffs.push(SinrCoefficients::from_realization(&r, &cfg.system));
        }
        Ok(Self { coeffs, inputs: ds.test.inputs.clone() })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Mean, median and 5th percentile, in bit/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub method: Method,
    pub num_users: usize,
    /// Per-user rates pooled over instances, instance-major, bit/s.
    pub rates: Vec<f64>,
    pub sum_rates: Vec<f64>,
    pub min_rates: Vec<f64>,
    pub summary: RateSummary,
}

impl PolicyEvaluation {
    pub fn mean_sum_rate(&self) -> f64 {
        mean(&self.sum_rates)
    }

    pub fn mean_min_rate(&self) -> f64 {
        mean(&self.min_rates)
    }

    /// Mean of the per-instance value the objective maximizes.
    pub fn mean_objective(&self, objective: Objective) -> f64 {
        match objective {
            Objective::SumRate => self.mean_sum_rate(),
            Objective::MaxMin => self.mean_min_rate(),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(values: &[f64]) -> Result<RateSummary> {
    if values.is_empty() {
        return Err(Error::Empty("no rates to summarize".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(RateSummary { mean: mean(values), median: quantile(&sorted, 0.5), p5: quantile(&sorted, 0.05) })
}

/// Powers from `policy` for every test instance.
pub fn policy_powers(policy: Policy<'_>, test: &TestSet, cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>> {
    let caps = cfg.system.p_max_vec();
    match policy {
        Policy::Uniform => Ok(vec![uniform_allocation(&cfg.system).0; test.len()]),
        Policy::Solver(objective) => test
            .coeffs
            .iter()
            .map(|c| crate::datagen::solve_for(cfg, objective, c).map(|r| r.powers.0))
            .collect(),
        Policy::Model(model) => {
            if model.input_dim() != test.inputs.ncols() {
                return Err(Error::dim("model input", test.inputs.ncols(), model.input_dim()));
            }
            if model.output_dim() != caps.len() {
                return Err(Error::dim("model output", caps.len(), model.output_dim()));
            }
            let out = model.forward_batch(test.inputs.view())?;
            Ok(out
                .rows()
                .into_iter()
                .map(|row| row.iter().zip(&caps).map(|(v, p)| v.clamp(0.0, 1.0) * p).collect())
                .collect())
        }
    }
}

/// Rates of `policy` on every test instance, evaluated with the true coefficients.
pub fn evaluate_policy(
    method: Method,
    policy: Policy<'_>,
    test: &TestSet,
    cfg: &ScenarioConfig,
) -> Result<PolicyEvaluation> {
    if test.is_empty() {
        return Err(Error::Empty("test set".into()));
    }
    let powers = policy_powers(policy, test, cfg)?;
    let num_users = cfg.system.num_users;
    let mut rates = Vec::with_capacity(num_users * test.len());
    let mut sum_rates = Vec::with_capacity(test.len());
    let mut min_rates = Vec::with_capacity(test.len());
    for (eta, c) in powers.iter().zip(&test.coeffs) {
        let r = uplink_rate(eta, c, &cfg.system);
        sum_rates.push(r.iter().sum());
        min_rates.push(r.iter().copied().fold(f64::INFINITY, f64::min));
        rates.extend(r);
    }
    let summary = summarize(&rates)?;
    Ok(PolicyEvaluation { method, num_users, rates, sum_rates, min_rates, summary })
}

/// Right-continuous empirical CDF on the sorted unique values:
/// `F(v_i) = #{values <= v_i} / n`.
pub fn empirical_cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::Empty("empirical CDF of no values".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical("NaN in CDF input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = p,
            _ => out.push((v, p)),
        }
    }
    Ok(out)
}

/// Value of a CDF table at `v` (0 below the smallest point).
pub fn cdf_at(table: &[(f64, f64)], v: f64) -> f64 {
    let n = table.partition_point(|&(x, _)| x <= v);
    if n == 0 { 0.0 } else { table[n - 1].1 }
}

/// `method,rate_bps,cdf` rows for every evaluation.
pub fn cdf_csv(evals: &[PolicyEvaluation]) -> Result<String> {
    let mut s = String::from("method,rate_bps,cdf\n");
    for e in evals {
        for (v, p) in empirical_cdf(&e.rates)? {
            s.push_str(&format!("{},{v},{p}\n", e.method.label()));
        }
    }
    Ok(s)
}

/// One row per method with rates in Mbit/s.
pub fn summary_csv(evals: &[PolicyEvaluation]) -> String {
    let mut s = String::from("method,samples,mean_mbps,median_mbps,p5_mbps,mean_sum_rate_mbps,mean_min_rate_mbps\n");
    for e in evals {
        s.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            e.method.label(),
            e.rates.len(),
            e.summary.mean / 1e6,
            e.summary.median / 1e6,
            e.summary.p5 / 1e6,
            e.mean_sum_rate() / 1e6,
            e.mean_min_rate() / 1e6,
        ));
    }
    s
}

/// Epochs reported in the training-curve table.
pub const MSE_REPORT_EPOCHS: [usize; 9] = [1, 5, 10, 15, 20, 25, 30, 35, 40];

/// Published train/val MSE per column `S1-SR, S1-MR, S2-SR, S2-MR, S3-SR, S3-MR`
/// at each of [`MSE_REPORT_EPOCHS`].
pub const REFERENCE_MSE: [[(f64, f64); 6]; 9] = [
    [(0.0425, 0.0346), (0.0625, 0.0564), (0.0558, 0.0470), (0.0606, 0.0478), (0.0803, 0.0732), (0.0723, 0.0630)],
    [(0.0187, 0.0192), (0.0455, 0.0456), (0.0343, 0.0351), (0.0357, 0.0376), (0.0719, 0.0720), (0.0447, 0.0470)],
    [(0.0160, 0.0160), (0.0420, 0.0422), (0.0317, 0.0333), (0.0330, 0.0335), (0.0717, 0.0722), (0.0431, 0.0471)],
    [(0.0150, 0.0175), (0.0402, 0.0403), (0.0307, 0.0320), (0.0319, 0.0339), (0.0716, 0.0714), (0.0414, 0.0436)],
    [(0.0143, 0.0154), (0.0390, 0.0396), (0.0302, 0.0312), (0.0310, 0.0324), (0.0715, 0.0718), (0.0407, 0.0420)],
    [(0.0129, 0.0133), (0.0364, 0.0370), (0.0287, 0.0289), (0.0282, 0.0286), (0.0713, 0.0717), (0.0396, 0.0401)],
    [(0.0126, 0.0128), (0.0359, 0.0361), (0.0284, 0.0291), (0.0279, 0.0290), (0.0713, 0.0713), (0.0393, 0.0393)],
    [(0.0123, 0.0125), (0.0355, 0.0359), (0.0282, 0.0285), (0.0277, 0.0299), (0.0713, 0.0713), (0.0391, 0.0390)],
    [(0.0121, 0.0127), (0.0350, 0.0357), (0.0280, 0.0288), (0.0276, 0.0279), (0.0712, 0.0712), (0.0389, 0.0407)],
];

pub const REFERENCE_COLUMNS: [&str; 6] = ["S1-SR", "S1-MR", "S2-SR", "S2-MR", "S3-SR", "S3-MR"];

/// Train/val MSE at the report epochs for several runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub columns: Vec<String>,
    /// `(epoch, [(train, val) per column])`.
    pub rows: Vec<(usize, Vec<(f64, f64)>)>,
}

pub fn mse_report(runs: &[(String, &[EpochLog])]) -> Result<MseReport> {
    let mut rows = Vec::with_capacity(MSE_REPORT_EPOCHS.len());
    for &epoch in &MSE_REPORT_EPOCHS {
        let cells = runs
            .iter()
            .map(|(_, log)| {
                log.iter()
                    .find(|e| e.epoch == epoch)
                    .map(|e| (e.train_mse, e.val_mse))
                    .ok_or(Error::MissingEpoch(epoch))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((epoch, cells));
    }
    Ok(MseReport { columns: runs.iter().map(|(c, _)| c.clone()).collect(), rows })
}

/// The published values in report form.
pub fn reference_mse_report() -> MseReport {
    MseReport {
        columns: REFERENCE_COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows: MSE_REPORT_EPOCHS.iter().zip(&REFERENCE_MSE).map(|(&e, r)| (e, r.to_vec())).collect(),
    }
}

impl MseReport {
    /// `epoch,<col> train,<col> val,...` with one row per report epoch.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch");
        for c in &self.columns {
            s.push_str(&format!(",{c} Tr,{c} Val"));
        }
        s.push('\n');
        for (epoch, cells) in &self.rows {
            s.push_str(&epoch.to_string());
            for (tr, val) in cells {
                s.push_str(&format!(",{tr:.6},{val:.6}"));
            }
            s.push('\n');
        }
        s
    }
}
