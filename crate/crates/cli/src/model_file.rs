//! MPM1 model container.
//!
//! Layout: magic `"MPM1"`, a u32 little-endian length, that many bytes
//! of JSON (the experiment config plus the training-data dims), then
//! every parameter tensor as little-endian f64 in the canonical order
//! defined by `ModelParams::tensors` — forward cell, backward cell if
//! bidirectional, head; per perspective the gates run
//! input/forget/output/candidate, each as `w_s, w_h, w_c, b`, matrices
//! row-major. Score-fusion containers hold one such block per
//! perspective's sub-model, in perspective order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use mplstm::error::Error;
use mplstm::network::ModelParams;

use crate::config::{ExperimentConfig, FusionChoice};

pub const MODEL_MAGIC: [u8; 4] = *b"MPM1";

/// Shape of the data the model was trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataDims {
    pub num_perspectives: usize,
    pub seq_len: usize,
    pub input_dim: usize,
    pub num_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EmbeddedConfig {
    experiment: ExperimentConfig,
    dims: DataDims,
}

/// A trained model plus everything needed to rebuild and validate it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub experiment: ExperimentConfig,
    pub dims: DataDims,
    /// One network, or one per perspective for score fusion.
    pub models: Vec<ModelParams>,
}

impl ModelFile {
    fn expected_model_count(experiment: &ExperimentConfig, dims: &DataDims) -> usize {
        match experiment.fusion {
            FusionChoice::Score => dims.num_perspectives,
            _ => 1,
        }
    }

    /// Parameter shapes implied by the embedded config.
    fn template(experiment: &ExperimentConfig, dims: &DataDims) -> Result<ModelParams, Error> {
        let config =
            experiment.network_config(dims.num_perspectives, dims.input_dim, dims.num_classes)?;
        let shape_config = match experiment.fusion {
            FusionChoice::Score => config.score_submodel(),
            _ => config,
        };
        Ok(ModelParams::zeros(&shape_config))
    }
}

pub fn write_model(path: &Path, model: &ModelFile) -> Result<(), Error> {
    let embedded = EmbeddedConfig {
        experiment: model.experiment.clone(),
        dims: model.dims,
    };
    let json = serde_json::to_vec(&embedded).expect("embedded config serializes");
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MODEL_MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    for params in &model.models {
        for tensor in params.tensors() {
            for &v in tensor {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ModelFile, Error> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::Truncated {
            expected: 8,
            got: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MODEL_MAGIC {
        return Err(Error::BadMagic {
            expected: MODEL_MAGIC,
            got: magic,
        });
    }
    let json_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let payload_start = 8usize
        .checked_add(json_len)
        .ok_or_else(|| Error::BadCounts("config length overflows".into()))?;
    if bytes.len() < payload_start {
        return Err(Error::Truncated {
            expected: payload_start as u64,
            got: bytes.len() as u64,
        });
    }
    let embedded: EmbeddedConfig = serde_json::from_slice(&bytes[8..payload_start])
        .map_err(|e| Error::InvalidConfig(format!("embedded model config: {e}")))?;

    let template = ModelFile::template(&embedded.experiment, &embedded.dims)?;
    let count = ModelFile::expected_model_count(&embedded.experiment, &embedded.dims);
    let scalars_per_model = template.num_scalars();
    let expected_len = payload_start as u64 + (count * scalars_per_model) as u64 * 8;
    if bytes.len() as u64 != expected_len {
        return Err(Error::Truncated {
            expected: expected_len,
            got: bytes.len() as u64,
        });
    }

    let mut offset = payload_start;
    let mut models = Vec::with_capacity(count);
    for _ in 0..count {
        let mut params = template.clone();
        for tensor in params.tensors_mut() {
            for v in tensor {
                *v = f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
                offset += 8;
            }
        }
        models.push(params);
    }

    Ok(ModelFile {
        experiment: embedded.experiment,
        dims: embedded.dims,
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mplstm::math::RngState;

    fn sample_model(fusion: FusionChoice) -> ModelFile {
        let experiment = ExperimentConfig {
            hidden: 3,
            fusion,
            cell: if fusion == FusionChoice::Score {
                crate::config::CellChoice::Vanilla
            } else {
                crate::config::CellChoice::Mp
            },
            ..ExperimentConfig::default()
        };
        let dims = DataDims {
            num_perspectives: 2,
            seq_len: 4,
            input_dim: 3,
            num_classes: 4,
        };
        let config = experiment
            .network_config(dims.num_perspectives, dims.input_dim, dims.num_classes)
            .unwrap();
        let mut rng = RngState::new(5);
        let models = match fusion {
            FusionChoice::Score => {
                let sub = config.score_submodel();
                (0..2).map(|_| ModelParams::init(&sub, &mut rng)).collect()
            }
            _ => vec![ModelParams::init(&config, &mut rng)],
        };
        ModelFile {
            experiment,
            dims,
            models,
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mpm1");
        let model = sample_model(FusionChoice::Joint);
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(model, back);
        // writing the reload is byte-identical
        let path2 = dir.path().join("m2.mpm1");
        write_model(&path2, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn score_container_holds_one_model_per_perspective() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.mpm1");
        let model = sample_model(FusionChoice::Score);
        assert_eq!(model.models.len(), 2);
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mpm1");
        let model = sample_model(FusionChoice::Joint);
        write_model(&path, &model).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[0] = b'Z';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_model(&path), Err(Error::BadMagic { .. })));

        std::fs::write(&path, &good[..good.len() - 8]).unwrap();
        assert!(matches!(read_model(&path), Err(Error::Truncated { .. })));

        let mut long = good.clone();
        long.extend_from_slice(&[0u8; 8]);
        std::fs::write(&path, &long).unwrap();
        assert!(matches!(read_model(&path), Err(Error::Truncated { .. })));
    }
}
