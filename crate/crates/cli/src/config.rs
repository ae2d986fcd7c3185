use std::path::Path;

use greycast_core::hybrid::{CombineScheme, HybridScheme, RelationConfig};
use greycast_core::markov::{Alpha, LogBase, StatePartition, DEFAULT_BOUNDARIES};
use greycast_core::neural::TrainConfig;
use greycast_core::series::DEFAULT_WINDOW;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelKind {
    Gm,
    Dgm,
    DgmFmarkov,
    Ignn,
    Sgnn,
    Hybrid,
}

/// Network training settings; the seed comes from the top-level `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub shuffle: bool,
    pub hidden: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            learning_rate: d.learning_rate,
            epochs: d.epochs,
            shuffle: d.shuffle,
            hidden: d.hidden,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelKind,
    pub state_boundaries: Vec<f64>,
    pub window: usize,
    pub train: TrainSection,
    /// Sub-window lengths of the SGNN's GM(1,1) sub-models.
    pub sub_windows: Vec<usize>,
    pub hybrid_scheme: HybridScheme,
    pub combine: CombineScheme,
    pub rho: f64,
    /// Treat the two error series as uncorrelated in the minimum-variance weight.
    pub assume_independent: bool,
    pub alpha: Alpha,
    pub log_base: LogBase,
    pub horizon: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::DgmFmarkov,
            state_boundaries: DEFAULT_BOUNDARIES.to_vec(),
            window: DEFAULT_WINDOW,
            train: TrainSection::default(),
            sub_windows: vec![8, 16, 32],
            hybrid_scheme: HybridScheme::MinVariance,
            combine: CombineScheme::Arithmetic,
            rho: 0.5,
            assume_independent: false,
            alpha: Alpha::OnePercent,
            log_base: LogBase::Natural,
            horizon: 5,
            folds: 5,
            seed: 42,
        }
    }
}

/// Values given on the command line; each one replaces the config value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub boundaries: Option<Vec<f64>>,
    pub window: Option<usize>,
    pub scheme: Option<HybridScheme>,
    pub combine: Option<CombineScheme>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub horizon: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub log_base: Option<LogBase>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) with flags applied on top, validated.
    pub fn resolve(path: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(v) = o.model {
            cfg.model = v;
        }
        if let Some(v) = &o.boundaries {
            cfg.state_boundaries = v.clone();
        }
        if let Some(v) = o.window {
            cfg.window = v;
        }
        if let Some(v) = o.scheme {
            cfg.hybrid_scheme = v;
        }
        if let Some(v) = o.combine {
            cfg.combine = v;
        }
        if let Some(v) = o.rho {
            cfg.rho = v;
        }
        if let Some(v) = o.alpha {
            cfg.alpha = Alpha::try_from(v)?;
        }
        if let Some(v) = o.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = o.folds {
            cfg.folds = v;
        }
        if let Some(v) = o.seed {
            cfg.seed = v;
        }
        if let Some(v) = o.log_base {
            cfg.log_base = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.partition()?;
        self.relation()?;
        self.train_config().validate()?;
        if self.window == 0 {
            return Err(CliError::Config("window must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        if self.folds == 0 {
            return Err(CliError::Config("folds must be at least 1".into()));
        }
        if self.sub_windows.len() < 2 || self.sub_windows.iter().any(|&l| l < 4) {
            return Err(CliError::Config(
                "sub_windows needs at least two lengths, each at least 4".into(),
            ));
        }
        Ok(())
    }

    pub fn partition(&self) -> Result<StatePartition> {
        Ok(StatePartition::new(self.state_boundaries.clone())?)
    }

    pub fn relation(&self) -> Result<RelationConfig> {
        Ok(RelationConfig::new(self.rho)?)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            seed: self.seed,
            shuffle: self.train.shuffle,
            hidden: self.train.hidden,
        }
    }
}
