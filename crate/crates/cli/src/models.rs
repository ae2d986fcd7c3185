//! Model persistence and per-kind fitting.

use std::path::Path;

use greycast_core::dgm::{fit_dgm, forecast_dgm, DgmModel};
use greycast_core::gm::{fit_gm11, forecast_gm11, GmModel};
use greycast_core::hybrid::{combine_forecasts, CombineScheme, HybridWeights};
use greycast_core::neural::{
    ignn_fit, ignn_forecast, sgnn_fit, sgnn_forecast, IgnnForecaster, SgnnForecaster,
};
use greycast_core::pipeline::{fit_dgm_fmarkov, forecast_dgm_fmarkov, DgmFMarkov};
use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, PipelineConfig};
use crate::error::{CliError, Result};
use crate::hybrid::fit_hybrid;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "snake_case")]
pub enum NetModel {
    Ignn(IgnnForecaster),
    Sgnn(SgnnForecaster),
}

/// The two base models of the hybrid and how they are combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub dgm_fmarkov: DgmFMarkov,
    pub ignn: IgnnForecaster,
    pub weights: HybridWeights,
    pub combine: CombineScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Gm(GmModel),
    Dgm(DgmModel),
    Fmarkov(DgmFMarkov),
    Net(NetModel),
    Hybrid(HybridModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub model: SavedModel,
}

pub fn fit_model(kind: ModelKind, x: &[f64], cfg: &PipelineConfig) -> Result<SavedModel> {
    Ok(match kind {
        ModelKind::Gm => SavedModel::Gm(fit_gm11(x)?),
        ModelKind::Dgm => SavedModel::Dgm(fit_dgm(x)?),
        ModelKind::DgmFmarkov => SavedModel::Fmarkov(fit_dgm_fmarkov(x, &cfg.partition()?)?),
        ModelKind::Ignn => {
            SavedModel::Net(NetModel::Ignn(ignn_fit(x, cfg.window, &cfg.train_config())?))
        }
        ModelKind::Sgnn => SavedModel::Net(NetModel::Sgnn(sgnn_fit(
            x,
            &cfg.sub_windows,
            &cfg.train_config(),
        )?)),
        ModelKind::Hybrid => SavedModel::Hybrid(fit_hybrid(x, cfg)?.model),
    })
}

/// Out-of-sample forecasts for the `horizon` steps after the training data.
pub fn forecast(model: &SavedModel, horizon: usize) -> Result<Vec<f64>> {
    Ok(match model {
        SavedModel::Gm(m) => tail(forecast_gm11(m, horizon)?.into_values(), horizon),
        SavedModel::Dgm(m) => tail(forecast_dgm(m, horizon)?.into_values(), horizon),
        SavedModel::Fmarkov(m) => forecast_dgm_fmarkov(m, horizon)?.into_values(),
        SavedModel::Net(NetModel::Ignn(f)) => ignn_forecast(f, horizon)?.into_values(),
        SavedModel::Net(NetModel::Sgnn(f)) => sgnn_forecast(f, horizon)?.into_values(),
        SavedModel::Hybrid(h) => {
            let bases = [
                forecast_dgm_fmarkov(&h.dgm_fmarkov, horizon)?.into_values(),
                ignn_forecast(&h.ignn, horizon)?.into_values(),
            ];
            combine_forecasts(&bases, &h.weights.weights, h.combine)?
        }
    })
}

fn tail(mut v: Vec<f64>, n: usize) -> Vec<f64> {
    v.split_off(v.len() - n)
}

pub fn save(path: &Path, model: SavedModel) -> Result<()> {
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        model,
    };
    let out = crate::data::create(path)?;
    crate::report::write_json(out, &file)
}

pub fn load(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Parse(format!(
            "{}: unsupported schema_version {} (expected {SCHEMA_VERSION})",
            path.display(),
            file.schema_version
        )));
    }
    match &file.model {
        SavedModel::Net(NetModel::Ignn(f)) => f.net.validate()?,
        SavedModel::Net(NetModel::Sgnn(f)) => f.net.validate()?,
        SavedModel::Hybrid(h) => h.ignn.net.validate()?,
        _ => {}
    }
    Ok(file.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<f64> {
        (0..40).map(|i| 10.0 + 0.05 * i as f64 + 0.2 * (i as f64).sin()).collect()
    }

    #[test]
    fn every_kind_round_trips() {
        let x = series();
        let mut cfg = PipelineConfig::default();
        cfg.train.epochs = 20;
        let dir = tempfile::tempdir().unwrap();
        for kind in [
            ModelKind::Gm,
            ModelKind::Dgm,
            ModelKind::DgmFmarkov,
            ModelKind::Ignn,
            ModelKind::Sgnn,
            ModelKind::Hybrid,
        ] {
            let m = fit_model(kind, &x, &cfg).unwrap();
            let path = dir.path().join("m.json");
            save(&path, m.clone()).unwrap();
            let back = load(&path).unwrap();
            assert_eq!(back, m, "{kind:?}");
            let a = forecast(&m, 3).unwrap();
            assert_eq!(a.len(), 3);
            assert_eq!(a, forecast(&back, 3).unwrap());
        }
    }

    #[test]
    fn json_layout() {
        let m = fit_model(ModelKind::Gm, &series(), &PipelineConfig::default()).unwrap();
        let v: serde_json::Value =
            serde_json::from_slice(&crate::report::to_json_bytes(&ModelFile {
                schema_version: 1,
                model: m,
            })
            .unwrap())
            .unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["kind"], "gm");
        assert!(v["a"].is_f64());
    }

    #[test]
    fn rejects_other_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"schema_version":2,"kind":"gm","a":0,"u":1,"x0_first":1,"n_fit":4}"#)
            .unwrap();
        assert_eq!(load(&path).unwrap_err().exit_code(), 4);
    }
}
