//! The JSON experiment configuration. Unknown keys are rejected so a
//! typo cannot silently fall back to a default.

use serde::{Deserialize, Serialize};

use mplstm::cells::AblationKind;
use mplstm::error::Error;
use mplstm::network::{CellKind, FusionMode, NetworkConfig};
use mplstm::training::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellChoice {
    Mp,
    Vanilla,
    AblationA,
    AblationB,
    AblationC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionChoice {
    Joint,
    FeatureDim,
    FeatureTime,
    Score,
}

/// Everything a `train`/`bench` run needs besides the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub cell: CellChoice,
    pub fusion: FusionChoice,
    pub bidirectional: bool,
    pub hidden: usize,
    pub attention: bool,
    pub dropout: f64,
    pub lr: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cell: CellChoice::Mp,
            fusion: FusionChoice::Joint,
            bidirectional: true,
            hidden: 32,
            attention: true,
            dropout: 0.1,
            lr: 1e-3,
            rho: 0.9,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 50,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn cell_kind(&self) -> CellKind {
        match self.cell {
            CellChoice::Mp => CellKind::Mp,
            CellChoice::Vanilla => CellKind::Vanilla,
            CellChoice::AblationA => CellKind::Ablation(AblationKind::ModelA),
            CellChoice::AblationB => CellKind::Ablation(AblationKind::ModelB),
            CellChoice::AblationC => CellKind::Ablation(AblationKind::ModelC),
        }
    }

    pub fn fusion_mode(&self) -> FusionMode {
        match self.fusion {
            FusionChoice::Joint => FusionMode::Joint,
            FusionChoice::FeatureDim => FusionMode::FeatureConcatDim,
            FusionChoice::FeatureTime => FusionMode::FeatureConcatTime,
            FusionChoice::Score => FusionMode::Score,
        }
    }

    /// Binds the experiment to a dataset's shape.
    pub fn network_config(
        &self,
        num_perspectives: usize,
        input_dim: usize,
        num_classes: usize,
    ) -> Result<NetworkConfig, Error> {
        let config = NetworkConfig {
            cell_kind: self.cell_kind(),
            fusion_mode: self.fusion_mode(),
            bidirectional: self.bidirectional,
            hidden_dim: self.hidden,
            num_perspectives,
            input_dim,
            num_classes,
            attention: self.attention,
            dropout_rate: self.dropout,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn train_config(&self) -> Result<TrainConfig, Error> {
        let config = TrainConfig {
            batch_size: self.batch_size,
            num_epochs: self.epochs,
            lr: self.lr,
            rho: self.rho,
            epsilon: self.epsilon,
            dropout_rate: self.dropout,
            seed: self.seed,
            eval_cadence: 1,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
