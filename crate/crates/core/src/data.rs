//! Synthetic multi-perspective task generation and the MPS1 binary
//! dataset format.
//!
//! The modsum task: draw class indices `a`, `b` uniformly, set the
//! label to `(a + b) mod K`, and show `a` only to perspective 1 and `b`
//! only to perspective 2 (as noisy one-hots repeated over `n`
//! instances). By modular symmetry the label is uniform given either
//! view alone, so any single-view model is capped at `1/K` accuracy
//! while the joint Bayes accuracy approaches 1 as the noise shrinks —
//! exactly the gap a joint multi-perspective learner should close.
//!
//! MPS1 layout (all little-endian): magic `"MPS1"`, then u32 fields
//! version (= 1), num_samples, m, n, d, K; then `num_samples` u32
//! labels; then `num_samples * m * n * d` f32 features in
//! `(sample, perspective, instance, feature)` order. Storage is f32,
//! compute promotes to f64 on load.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::Error;
use crate::math::RngState;
use crate::network::SequenceSample;

pub const DATASET_MAGIC: [u8; 4] = *b"MPS1";
pub const DATASET_VERSION: u32 = 1;
const HEADER_LEN: u64 = 28;

/// An in-memory dataset: shared shape plus labelled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub num_perspectives: usize,
    pub seq_len: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
    pub samples: Vec<SequenceSample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks every sample against the declared shape and class count.
    pub fn validate(&self) -> Result<(), Error> {
        for sample in &self.samples {
            sample.validate()?;
            if sample.num_perspectives() != self.num_perspectives {
                return Err(Error::PerspectiveCountMismatch {
                    expected: self.num_perspectives,
                    got: sample.num_perspectives(),
                });
            }
            if sample.seq_len() != self.seq_len {
                return Err(Error::RaggedLengths {
                    perspective: 0,
                    expected: self.seq_len,
                    got: sample.seq_len(),
                });
            }
            if sample.feature_dim() != self.feature_dim {
                return Err(Error::FeatureDimMismatch {
                    perspective: 0,
                    instance: 0,
                    expected: self.feature_dim,
                    got: sample.feature_dim(),
                });
            }
            if sample.label >= self.num_classes {
                return Err(Error::LabelOutOfRange {
                    label: sample.label as u32,
                    num_classes: self.num_classes as u32,
                });
            }
        }
        Ok(())
    }

    /// Single-perspective restriction of the whole dataset.
    pub fn extract_view(&self, p: usize) -> Dataset {
        Dataset {
            num_perspectives: 1,
            seq_len: self.seq_len,
            feature_dim: self.feature_dim,
            num_classes: self.num_classes,
            samples: self.samples.iter().map(|s| s.extract_view(p)).collect(),
        }
    }
}

/// Parameters of the modsum generator. The task always has two
/// perspectives, and the feature dim equals the class count (one-hot).
#[derive(Debug, Clone, PartialEq)]
pub struct ModSumSpec {
    pub num_classes: usize,
    pub seq_len: usize,
    pub noise_std: f64,
    pub num_samples: usize,
}

impl ModSumSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("modsum: num_classes must be >= 2".into()));
        }
        if self.seq_len == 0 {
            return Err(Error::InvalidConfig("modsum: seq_len must be >= 1".into()));
        }
        if self.noise_std < 0.0 {
            return Err(Error::InvalidConfig("modsum: noise_std must be >= 0".into()));
        }
        if self.num_samples == 0 {
            return Err(Error::InvalidConfig("modsum: num_samples must be >= 1".into()));
        }
        Ok(())
    }
}

fn noisy_onehot_sequence(
    hot: usize,
    k: usize,
    n: usize,
    noise_std: f64,
    rng: &mut RngState,
) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..k)
                .map(|j| {
                    let base = if j == hot { 1.0 } else { 0.0 };
                    if noise_std > 0.0 {
                        base + noise_std * rng.normal()
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect()
}

/// Generates a modsum dataset: label `(a + b) mod K`, with `a` visible
/// only in perspective 1 and `b` only in perspective 2.
pub fn gen_modsum(spec: &ModSumSpec, rng: &mut RngState) -> Result<Dataset, Error> {
    spec.validate()?;
    let k = spec.num_classes;
    let samples = (0..spec.num_samples)
        .map(|_| {
            let a = rng.below(k as u64) as usize;
            let b = rng.below(k as u64) as usize;
            let view_a = noisy_onehot_sequence(a, k, spec.seq_len, spec.noise_std, rng);
            let view_b = noisy_onehot_sequence(b, k, spec.seq_len, spec.noise_std, rng);
            SequenceSample {
                perspectives: vec![view_a, view_b],
                label: (a + b) % k,
            }
        })
        .collect();
    Ok(Dataset {
        num_perspectives: 2,
        seq_len: spec.seq_len,
        feature_dim: k,
        num_classes: k,
        samples,
    })
}

/// Writes the dataset in MPS1 format (f32 features on disk).
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), Error> {
    data.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&DATASET_MAGIC)?;
    for count in [
        DATASET_VERSION,
        data.len() as u32,
        data.num_perspectives as u32,
        data.seq_len as u32,
        data.feature_dim as u32,
        data.num_classes as u32,
    ] {
        w.write_all(&count.to_le_bytes())?;
    }
    for sample in &data.samples {
        w.write_all(&(sample.label as u32).to_le_bytes())?;
    }
    for sample in &data.samples {
        for view in &sample.perspectives {
            for instance in view {
                for &v in instance {
                    w.write_all(&(v as f32).to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

/// Reads and fully validates an MPS1 file: magic, version, nonzero
/// counts, exact length, label range.
pub fn read_dataset(path: &Path) -> Result<Dataset, Error> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if (bytes.len() as u64) < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            got: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != DATASET_MAGIC {
        return Err(Error::BadMagic {
            expected: DATASET_MAGIC,
            got: magic,
        });
    }
    let version = read_u32(&bytes, 4);
    if version != DATASET_VERSION {
        return Err(Error::BadVersion {
            expected: DATASET_VERSION,
            got: version,
        });
    }
    let num_samples = read_u32(&bytes, 8) as u64;
    let m = read_u32(&bytes, 12) as u64;
    let n = read_u32(&bytes, 16) as u64;
    let d = read_u32(&bytes, 20) as u64;
    let k = read_u32(&bytes, 24) as u64;
    if num_samples == 0 || m == 0 || n == 0 || d == 0 || k == 0 {
        return Err(Error::BadCounts(format!(
            "all counts must be >= 1 (num_samples={num_samples}, m={m}, n={n}, d={d}, K={k})"
        )));
    }
    let feature_count = num_samples
        .checked_mul(m)
        .and_then(|v| v.checked_mul(n))
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(|| Error::BadCounts("feature count overflows u64".into()))?;
    let expected = HEADER_LEN
        .checked_add(4 * num_samples)
        .and_then(|v| v.checked_add(feature_count.checked_mul(4)?))
        .ok_or_else(|| Error::BadCounts("payload size overflows u64".into()))?;
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            expected,
            got: bytes.len() as u64,
        });
    }

    let mut labels = Vec::with_capacity(num_samples as usize);
    let mut offset = HEADER_LEN as usize;
    for _ in 0..num_samples {
        let label = read_u32(&bytes, offset);
        offset += 4;
        if (label as u64) >= k {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: k as u32,
            });
        }
        labels.push(label as usize);
    }

    let mut samples = Vec::with_capacity(num_samples as usize);
    for label in labels {
        let perspectives = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        (0..d)
                            .map(|_| {
                                let v = f32::from_le_bytes(
                                    bytes[offset..offset + 4].try_into().unwrap(),
                                );
                                offset += 4;
                                v as f64
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        samples.push(SequenceSample {
            perspectives,
            label,
        });
    }

    Ok(Dataset {
        num_perspectives: m as usize,
        seq_len: n as usize,
        feature_dim: d as usize,
        num_classes: k as usize,
        samples,
    })
}

/// Shuffled index batches: one permutation per call, partitioned in
/// order; the last batch may be short.
pub fn split_batches(data: &Dataset, batch_size: usize, rng: &mut RngState) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "split_batches: batch_size must be >= 1");
    let n = data.len();
    let mut indices: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        indices.swap(i, j);
    }
    indices.chunks(batch_size).map(|c| c.to_vec()).collect()
}
