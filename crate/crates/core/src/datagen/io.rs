use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{input_dim, DatasetRecord, ScenarioConfig, Split, Standardization};
use crate::error::{Error, Result};
use crate::system::Point;

pub const DATASET_FORMAT: &str = "cellfree-dataset/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroppedSample {
    pub split: Split,
    pub index: u64,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format: String,
    pub config: ScenarioConfig,
    pub ap_seed: u64,
    /// Shared AP layout, absent when APs are redrawn per sample.
    pub ap_positions: Option<Vec<Point>>,
    pub input_dim: usize,
    pub target_dim: usize,
    /// `input_dim + target_dim` values per record.
    pub record_len: usize,
    /// Records actually written per split.
    pub counts: BTreeMap<Split, usize>,
    /// Fitted on the training split only; already applied to every stored input.
    pub standardization: Option<Standardization>,
    /// SHA-256 of each split file, hex.
    pub sha256: BTreeMap<Split, String>,
    pub dropped: Vec<DroppedSample>,
}

impl DatasetManifest {
    /// Global sample indices of the records stored in `split`, in file order.
    pub fn indices(&self, split: Split) -> Vec<u64> {
        self.config
            .split_range(split)
            .filter(|i| !self.dropped.iter().any(|d| d.index == *i))
            .collect()
    }

    fn check_dimensions(&self) -> Result<()> {
        let sys = &self.config.system;
        let want_in = input_dim(self.config.scenario, sys);
        if self.input_dim != want_in {
            return Err(Error::dim("manifest input width", want_in, self.input_dim));
        }
        if self.target_dim != sys.num_users {
            return Err(Error::dim("manifest target width", sys.num_users, self.target_dim));
        }
        if self.record_len != self.input_dim + self.target_dim {
            return Err(Error::dim("manifest record length", self.input_dim + self.target_dim, self.record_len));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
    pub indices: Vec<u64>,
}

impl SplitData {
    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub train: SplitData,
    pub val: SplitData,
    pub test: SplitData,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub(super) fn write_dataset(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    records: &[(Split, DatasetRecord)],
    dropped: Vec<DroppedSample>,
    standardization: Option<Standardization>,
) -> Result<DatasetManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let input_dim = cfg.input_dim();
    let target_dim = cfg.system.num_users;
    let mut counts = BTreeMap::new();
    let mut hashes = BTreeMap::new();
    for split in Split::ALL {
        let mut bytes = Vec::new();
        let mut n = 0;
        for (_, rec) in records.iter().filter(|(s, _)| *s == split) {
            if rec.input.len() != input_dim || rec.target.len() != target_dim {
                return Err(Error::dim("record", input_dim + target_dim, rec.input.len() + rec.target.len()));
            }
            for v in rec.input.iter().chain(&rec.target) {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            n += 1;
        }
        let path = out_dir.join(split.file_name());
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        counts.insert(split, n);
        hashes.insert(split, sha256_hex(&bytes));
    }
    let manifest = DatasetManifest {
        format: DATASET_FORMAT.into(),
        config: cfg.clone(),
        ap_seed: cfg.ap_seed(),
        ap_positions: (!cfg.resample_aps).then(|| cfg.ap_layout()),
        input_dim,
        target_dim,
        record_len: input_dim + target_dim,
        counts,
        standardization,
        sha256: hashes,
        dropped,
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    if manifest.format != DATASET_FORMAT {
        return Err(Error::Truncated { file: path, detail: format!("unknown format {:?}", manifest.format) });
    }
    manifest.check_dimensions()?;
    Ok(manifest)
}

/// Loads and verifies one split against its manifest.
pub fn load_split(dir: &Path, manifest: &DatasetManifest, split: Split) -> Result<SplitData> {
    let path = dir.join(split.file_name());
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let expected = manifest.sha256.get(&split).cloned().unwrap_or_default();
    let actual = sha256_hex(&bytes);
    if actual != expected {
        return Err(Error::HashMismatch { file: path, expected, actual });
    }
    let rec_bytes = manifest.record_len * 8;
    let rows = manifest.counts.get(&split).copied().unwrap_or(0);
    if bytes.len() != rows * rec_bytes {
        return Err(Error::Truncated {
            file: path,
            detail: format!("expected {rows} records of {rec_bytes} bytes, found {} bytes", bytes.len()),
        });
    }
    let indices = manifest.indices(split);
    if indices.len() != rows {
        return Err(Error::Truncated {
            file: path,
            detail: format!("manifest lists {} kept samples but {rows} records", indices.len()),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let all = Array2::from_shape_vec((rows, manifest.record_len), values).expect("record matrix shape");
    Ok(SplitData {
        inputs: all.slice(ndarray::s![.., ..manifest.input_dim]).to_owned(),
        targets: all.slice(ndarray::s![.., manifest.input_dim..]).to_owned(),
        indices,
    })
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = read_manifest(dir)?;
    let train = load_split(dir, &manifest, Split::Train)?;
    let val = load_split(dir, &manifest, Split::Val)?;
    let test = load_split(dir, &manifest, Split::Test)?;
    Ok(Dataset { manifest, train, val, test })
}

/// Reads and checks only the manifest.
pub fn load_manifest(dir: &Path) -> Result<DatasetManifest> {
    read_manifest(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Objective, Scenario};
    use crate::datagen::build_dataset;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig {
            scenario: Scenario::S3,
            objective: Objective::SumRate,
            n_train: 10,
            n_val: 3,
            n_test: 2,
            master_seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn save_load_is_bit_exact_and_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let m1 = build_dataset(&cfg(), d1.path(), |_, _| {}).unwrap();
        build_dataset(&cfg(), d2.path(), |_, _| {}).unwrap();
        for f in ["manifest.json", "train.bin", "val.bin", "test.bin"] {
            assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap(), "{f}");
        }
        let ds = load_dataset(d1.path()).unwrap();
        assert_eq!(ds.manifest, m1);
        assert_eq!(ds.train.inputs.dim(), (10, 150));
        assert_eq!(ds.test.targets.dim(), (2, 5));
        assert_eq!(ds.val.indices, vec![10, 11, 12]);
        let raw = fs::read(d1.path().join("train.bin")).unwrap();
        let first = f64::from_le_bytes(raw[..8].try_into().unwrap());
        assert_eq!(first, ds.train.inputs[[0, 0]]);
        // training-split features are standardized
        let col: Vec<f64> = ds.train.inputs.column(7).to_vec();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-9);
        assert!(ds.train.targets.iter().all(|&t| (0.0..=1.0).contains(&t)));
    }

    #[test]
    fn corrupted_file_fails_hash() {
        let d = tempfile::tempdir().unwrap();
        build_dataset(&cfg(), d.path(), |_, _| {}).unwrap();
        let p = d.path().join("val.bin");
        let mut bytes = fs::read(&p).unwrap();
        bytes[3] ^= 0x40;
        fs::write(&p, bytes).unwrap();
        assert!(matches!(load_dataset(d.path()), Err(Error::HashMismatch { .. })));
    }

    #[test]
    fn truncated_file_detected() {
        let d = tempfile::tempdir().unwrap();
        let mut m = build_dataset(&cfg(), d.path(), |_, _| {}).unwrap();
        let p = d.path().join("test.bin");
        let bytes = fs::read(&p).unwrap();
        let short = &bytes[..bytes.len() - 8];
        fs::write(&p, short).unwrap();
        // keep the hash consistent so the length check is what fires
        m.sha256.insert(Split::Test, sha256_hex(short));
        fs::write(d.path().join("manifest.json"), serde_json::to_string(&m).unwrap()).unwrap();
        assert!(matches!(load_dataset(d.path()), Err(Error::Truncated { .. })));
    }

    #[test]
    fn manifest_dimension_disagreement() {
        let d = tempfile::tempdir().unwrap();
        let mut m = build_dataset(&cfg(), d.path(), |_, _| {}).unwrap();
        m.target_dim = 4;
        m.record_len = m.input_dim + 4;
        fs::write(d.path().join("manifest.json"), serde_json::to_string(&m).unwrap()).unwrap();
        assert!(matches!(load_dataset(d.path()), Err(Error::Dimension { expected: 5, actual: 4, .. })));
    }

    #[test]
    fn missing_split_names_the_file() {
        let d = tempfile::tempdir().unwrap();
        build_dataset(&cfg(), d.path(), |_, _| {}).unwrap();
        fs::remove_file(d.path().join("test.bin")).unwrap();
        match load_dataset(d.path()) {
            Err(Error::MissingFile(p)) => assert!(p.ends_with("test.bin")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
