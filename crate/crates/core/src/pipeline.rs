//! The gen / solve / train / eval stages, shared by the command-line tool and tests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::datagen::{sample_realization, solve_for, Dataset, ScenarioConfig};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_policy, Method, Policy, PolicyEvaluation, TestSet};
use crate::neural::{init_mlp, train, Checkpoint, CheckpointHeader, EpochLog, MlpLayout, TrainSchedule, TrainingData};
use crate::rng::{derive_seed, label};
use crate::solvers::SolverReport;
use crate::system::SinrCoefficients;

/// Network layout names accepted in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutChoice {
    Ann1,
    Ann2,
    Ann3,
}

impl LayoutChoice {
    /// The named layout at its native input width: `2K` user coordinates for
    /// ANN1/ANN2, `K * M` fading values for ANN3.
    pub fn build(self, system: &SystemConfig) -> MlpLayout {
        let k = system.num_users;
        match self {
            LayoutChoice::Ann1 => MlpLayout::ann1(2 * k, k),
            LayoutChoice::Ann2 => MlpLayout::ann2(2 * k, k),
            LayoutChoice::Ann3 => MlpLayout::ann3(k * system.num_aps, k),
        }
    }
}

impl std::str::FromStr for LayoutChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ann1" => Ok(LayoutChoice::Ann1),
            "ann2" => Ok(LayoutChoice::Ann2),
            "ann3" => Ok(LayoutChoice::Ann3),
            other => Err(Error::Config(format!("unknown layout {other:?}"))),
        }
    }
}

/// Everything a run needs besides file locations. Every field has a default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: ScenarioConfig,
    pub training: TrainSchedule,
    /// Weight initialization seed; derived from the master seed when absent.
    pub init_seed: Option<u64>,
    /// Mini-batch shuffling seed; the master seed when absent.
    pub train_seed: Option<u64>,
    /// Overrides the scenario-matched layout.
    pub layout: Option<LayoutChoice>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed.unwrap_or_else(|| derive_seed(self.data.master_seed, label::INIT, 0))
    }

    pub fn train_seed(&self) -> u64 {
        self.train_seed.unwrap_or(self.data.master_seed)
    }
}

/// Solves dataset sample `index` of `cfg` with its configured objective.
pub fn solve_instance(cfg: &ScenarioConfig, index: u64) -> Result<SolverReport> {
    cfg.validate()?;
    let r = sample_realization(cfg, index)?;
    let coeffs = SinrCoefficients::from_realization(&r, &cfg.system);
    solve_for(cfg, cfg.objective, &coeffs)
}

/// Trains a fresh network on a dataset. The layout defaults to the one matched
/// to the dataset's scenario and objective.
pub fn train_on_dataset(
    ds: &Dataset,
    layout: Option<LayoutChoice>,
    schedule: &TrainSchedule,
    init_seed: u64,
    train_seed: u64,
    on_epoch: impl FnMut(&EpochLog),
) -> Result<(Checkpoint, Vec<EpochLog>)> {
    let cfg = &ds.manifest.config;
    let (input_dim, output_dim) = (ds.manifest.input_dim, ds.manifest.target_dim);
    let layout = match layout {
        Some(choice) => {
            let l = choice.build(&cfg.system);
            if l.input_dim != input_dim {
                return Err(Error::dim("dataset input width", l.input_dim, input_dim));
            }
            l
        }
        None => MlpLayout::for_task(cfg.scenario, cfg.objective, input_dim, output_dim),
    };
    let model = init_mlp(&layout, init_seed)?;
    let data = TrainingData {
        train_x: ds.train.inputs.view(),
        train_y: ds.train.targets.view(),
        val_x: ds.val.inputs.view(),
        val_y: ds.val.targets.view(),
    };
    let outcome = train(model, data, schedule, train_seed, on_epoch)?;
    let header = CheckpointHeader {
        format: crate::neural::CHECKPOINT_FORMAT.into(),
        layout,
        init_seed,
        train_seed,
        schedule: schedule.clone(),
        epoch: outcome.log.len(),
        scenario: Some(cfg.scenario),
        objective: Some(cfg.objective),
        input_standardization: ds.manifest.standardization.clone(),
    };
    Ok((Checkpoint { header, model: outcome.model }, outcome.log))
}

/// Evaluates both solvers, the given learned models and the uniform baseline
/// on the test split, in report order.
pub fn evaluate_dataset(ds: &Dataset, models: &[Checkpoint]) -> Result<Vec<PolicyEvaluation>> {
    let cfg = &ds.manifest.config;
    let test = TestSet::from_dataset(ds)?;
    let mut learned: Vec<(Method, &Checkpoint)> = Vec::new();
    for ckpt in models {
        let objective = ckpt
            .header
            .objective
            .ok_or_else(|| Error::Config("checkpoint does not record its objective".into()))?;
        if ckpt.header.input_standardization != ds.manifest.standardization {
            return Err(Error::Config("checkpoint was trained with different input scaling than this dataset".into()));
        }
        let method = Method::learned(objective);
        if learned.iter().any(|(m, _)| *m == method) {
            return Err(Error::Config(format!("more than one {} model given", method.label())));
        }
        learned.push((method, ckpt));
    }
    let mut out = Vec::new();
    for method in Method::ALL {
        let policy = match method {
            Method::SrMax => Policy::Solver(crate::config::Objective::SumRate),
            Method::MrMax => Policy::Solver(crate::config::Objective::MaxMin),
            Method::Uni => Policy::Uniform,
            _ => match learned.iter().find(|(m, _)| *m == method) {
                Some((_, ckpt)) => Policy::Model(&ckpt.model),
                None => continue,
            },
        };
        out.push(evaluate_policy(method, policy, &test, cfg)?);
    }
    Ok(out)
}
