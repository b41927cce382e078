//! Dense feed-forward networks trained with Nadam.
//!
//! Weights are `fan_in x fan_out`, so a batch `X` (`n x fan_in`) maps to
//! `X W + b`. Everything is `f64` and single-threaded, so a run is
//! reproducible bit for bit from its seeds.

mod checkpoint;
mod layout;
mod loss;
mod model;
mod nadam;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointHeader, CHECKPOINT_FORMAT};
pub use layout::{Activation, HiddenLayer, MlpLayout};
pub use loss::{loss_and_grad, loss_relative_mse, LossKind};
pub use model::{init_mlp, Dense, Gradients, MlpModel, Tape};
pub use nadam::{NadamParams, NadamState};
pub use train::{
    epoch_log_csv, evaluate_loss, predict_powers, train, EpochLog, Phase, TrainLossLog, TrainOutcome, TrainSchedule,
    TrainingData,
};
