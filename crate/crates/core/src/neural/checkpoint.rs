//! Model checkpoints.
//!
//! A checkpoint is one compact JSON header line terminated by `\n`, followed
//! by every layer's weights (row-major, `fan_in x fan_out`) and then its
//! biases, as little-endian `f64`, in layer order.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::layout::MlpLayout;
use super::model::{Dense, MlpModel};
use super::train::TrainSchedule;
use crate::config::{Objective, Scenario};
use crate::datagen::Standardization;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "cellfree-mlp/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub format: String,
    pub layout: MlpLayout,
    pub init_seed: u64,
    pub train_seed: u64,
    pub schedule: TrainSchedule,
    /// Epochs completed.
    pub epoch: usize,
    pub scenario: Option<Scenario>,
    pub objective: Option<Objective>,
    /// Feature scaling that was applied to the training inputs.
    pub input_standardization: Option<Standardization>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub model: MlpModel,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut bytes = serde_json::to_vec(&ckpt.header)?;
    bytes.push(b'\n');
    for layer in &ckpt.model.layers {
        for v in layer.weights.iter().chain(layer.bias.iter()) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let split = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::Truncated {
        file: path.to_path_buf(),
        detail: "missing header line".into(),
    })?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[..split])?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(Error::Truncated {
            file: path.to_path_buf(),
            detail: format!("unknown format {:?}", header.format),
        });
    }
    header.layout.validate()?;
    let body = &bytes[split + 1..];
    let expected = header.layout.parameter_count() * 8;
    if body.len() != expected {
        return Err(Error::Truncated {
            file: path.to_path_buf(),
            detail: format!("expected {expected} weight bytes, found {}", body.len()),
        });
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let layers = header
        .layout
        .layers()
        .into_iter()
        .map(|(fan_in, fan_out, activation)| {
            let w: Vec<f64> = values.by_ref().take(fan_in * fan_out).collect();
            let b: Vec<f64> = values.by_ref().take(fan_out).collect();
            Dense {
                weights: Array2::from_shape_vec((fan_in, fan_out), w).expect("weight shape"),
                bias: Array1::from(b),
                activation,
            }
        })
        .collect();
    let model = MlpModel { layout: header.layout.clone(), layers, init_seed: header.init_seed };
    Ok(Checkpoint { header, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::init_mlp;

    fn sample() -> Checkpoint {
        let layout = MlpLayout::ann1(10, 5);
        let model = init_mlp(&layout, 17).unwrap();
        Checkpoint {
            header: CheckpointHeader {
                format: CHECKPOINT_FORMAT.into(),
                layout,
                init_seed: 17,
                train_seed: 3,
                schedule: TrainSchedule::default(),
                epoch: 40,
                scenario: Some(Scenario::S1),
                objective: Some(Objective::SumRate),
                input_standardization: None,
            },
            model,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        let c = sample();
        save_checkpoint(&p, &c).unwrap();
        let back = load_checkpoint(&p).unwrap();
        assert_eq!(back, c);
        let len = fs::metadata(&p).unwrap().len() as usize;
        let header_len = serde_json::to_vec(&c.header).unwrap().len() + 1;
        assert_eq!(len - header_len, 46_661 * 8);
    }

    #[test]
    fn first_weight_follows_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        let c = sample();
        save_checkpoint(&p, &c).unwrap();
        let bytes = fs::read(&p).unwrap();
        let start = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        let w00 = f64::from_le_bytes(bytes[start..start + 8].try_into().unwrap());
        let w01 = f64::from_le_bytes(bytes[start + 8..start + 16].try_into().unwrap());
        assert_eq!(w00, c.model.layers[0].weights[[0, 0]]);
        assert_eq!(w01, c.model.layers[0].weights[[0, 1]]);
    }

    #[test]
    fn truncated_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        save_checkpoint(&p, &sample()).unwrap();
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(load_checkpoint(&p), Err(Error::Truncated { .. })));
        assert!(matches!(load_checkpoint(&dir.path().join("nope")), Err(Error::MissingFile(_))));
    }
}
