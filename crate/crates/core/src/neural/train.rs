use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::loss::{loss_and_grad, loss_relative_mse, LossKind};
use super::model::{Gradients, MlpModel};
use super::nadam::{NadamParams, NadamState};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, label, seeded};
use crate::solvers::PowerVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub learning_rate: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSchedule {
    pub phases: Vec<Phase>,
    pub batch_size: usize,
    pub optimizer: NadamParams,
    /// Start every phase with fresh moment estimates (only the weights carry over).
    pub reset_optimizer_between_phases: bool,
    pub loss: LossKind,
    pub train_loss_log: TrainLossLog,
}

/// How the per-epoch training loss is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainLossLog {
    /// Sample-weighted mean of the mini-batch losses seen during the epoch.
    #[default]
    RunningMean,
    /// A separate pass over the whole training split after the epoch.
    EndOfEpoch,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            phases: vec![
                Phase { learning_rate: 0.002, epochs: 20 },
                Phase { learning_rate: 0.001, epochs: 20 },
            ],
            batch_size: 128,
            optimizer: NadamParams::default(),
            reset_optimizer_between_phases: true,
            loss: LossKind::CapNormalized,
            train_loss_log: TrainLossLog::RunningMean,
        }
    }
}

impl TrainSchedule {
    pub fn total_epochs(&self) -> usize {
        self.phases.iter().map(|p| p.epochs).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub log: Vec<EpochLog>,
}

/// Borrowed training and validation matrices (one sample per row).
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub train_x: ArrayView2<'a, f64>,
    pub train_y: ArrayView2<'a, f64>,
    pub val_x: ArrayView2<'a, f64>,
    pub val_y: ArrayView2<'a, f64>,
}

const EVAL_CHUNK: usize = 2048;

/// Mean loss over a whole split, evaluated in fixed-size chunks.
pub fn evaluate_loss(model: &MlpModel, x: ArrayView2<f64>, y: ArrayView2<f64>, kind: LossKind) -> Result<f64> {
    if x.nrows() == 0 {
        return Err(Error::Empty("evaluation split".into()));
    }
    let mut total = 0.0;
    for start in (0..x.nrows()).step_by(EVAL_CHUNK) {
        let end = (start + EVAL_CHUNK).min(x.nrows());
        let xs = x.slice(ndarray::s![start..end, ..]);
        let ys = y.slice(ndarray::s![start..end, ..]);
        let pred = model.forward_batch(xs)?;
        total += loss_relative_mse(pred.view(), ys, kind)? * (end - start) as f64;
    }
    Ok(total / x.nrows() as f64)
}

/// Runs the phase schedule, logging train and validation loss after every epoch.
///
/// Each phase continues from the weights left by the previous one. The
/// training order is reshuffled every epoch from a seed derived from `seed`
/// and the epoch number.
pub fn train(
    model: MlpModel,
    data: TrainingData<'_>,
    schedule: &TrainSchedule,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    let TrainingData { train_x, train_y, val_x, val_y } = data;
    if train_x.nrows() == 0 || val_x.nrows() == 0 {
        return Err(Error::Empty("training and validation splits must be non-empty".into()));
    }
    if train_x.nrows() != train_y.nrows() || val_x.nrows() != val_y.nrows() {
        return Err(Error::dim("input/target rows", train_x.nrows(), train_y.nrows()));
    }
    if train_y.ncols() != model.output_dim() || val_y.ncols() != model.output_dim() {
        return Err(Error::dim("targets", model.output_dim(), train_y.ncols()));
    }
    if train_x.ncols() != model.input_dim() || val_x.ncols() != model.input_dim() {
        return Err(Error::dim("network input", model.input_dim(), train_x.ncols()));
    }
    if schedule.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }

    let mut model = model;
    let mut grads = Gradients::zeros_like(&model);
    let mut opt = NadamState::new(&model, schedule.optimizer);
    let mut order: Vec<usize> = (0..train_x.nrows()).collect();
    let mut log = Vec::with_capacity(schedule.total_epochs());
    let mut epoch = 0;
    for (pi, phase) in schedule.phases.iter().enumerate() {
        if pi > 0 && schedule.reset_optimizer_between_phases {
            opt = NadamState::new(&model, schedule.optimizer);
        }
        for _ in 0..phase.epochs {
            epoch += 1;
            let mut rng = seeded(derive_seed(seed, label::SHUFFLE, epoch as u64));
            order.shuffle(&mut rng);
            let mut running = 0.0;
            for batch in order.chunks(schedule.batch_size) {
                let xb = train_x.select(Axis(0), batch);
                let yb = train_y.select(Axis(0), batch);
                let tape = model.forward_tape(xb.view())?;
                let (loss, d_out) = loss_and_grad(tape.output.view(), yb.view(), schedule.loss)?;
                if !loss.is_finite() {
                    return Err(Error::Numerical(format!("non-finite training loss at epoch {epoch}")));
                }
                running += loss * batch.len() as f64;
                model.backward(&tape, d_out, &mut grads);
                opt.step(&mut model, &grads, phase.learning_rate);
            }
            if !model.all_finite() {
                return Err(Error::Numerical(format!("non-finite weights after epoch {epoch}")));
            }
            let entry = EpochLog {
                epoch,
                train_mse: match schedule.train_loss_log {
                    TrainLossLog::RunningMean => running / train_x.nrows() as f64,
                    TrainLossLog::EndOfEpoch => evaluate_loss(&model, train_x, train_y, schedule.loss)?,
                },
                val_mse: evaluate_loss(&model, val_x, val_y, schedule.loss)?,
            };
            on_epoch(&entry);
            log.push(entry);
        }
    }
    Ok(TrainOutcome { model, log })
}

/// Network output clipped to `[0, 1]` and scaled by each user's cap.
pub fn predict_powers(model: &MlpModel, x: &[f64], caps: &[f64]) -> Result<PowerVector> {
    let y = model.forward(x)?;
    if y.len() != caps.len() {
        return Err(Error::dim("power caps", y.len(), caps.len()));
    }
    Ok(PowerVector(y.iter().zip(caps).map(|(v, p)| v.clamp(0.0, 1.0) * p).collect()))
}

/// CSV with columns `epoch,train_mse,val_mse`.
pub fn epoch_log_csv(log: &[EpochLog]) -> String {
    let mut s = String::from("epoch,train_mse,val_mse\n");
    for e in log {
        s.push_str(&format!("{},{},{}\n", e.epoch, e.train_mse, e.val_mse));
    }
    s
}
