//! The DGM-FMarkov / IGNN hybrid.

use std::collections::BTreeMap;

use greycast_core::hybrid::{
    accuracy_series, combine_forecasts, effective_degree, effective_weights, min_variance_weight,
    optimize_relation_weights, simplex_ls_weights, HybridScheme, HybridWeights,
};
use greycast_core::metrics::{evaluate, EvaluationReport};
use greycast_core::neural::{ignn_fit, IgnnForecaster};
use greycast_core::pipeline::{fit_dgm_fmarkov, DgmFMarkov};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::models::HybridModel;

pub const BASE_NAMES: [&str; 2] = ["dgm_fmarkov", "ignn"];

/// Both base models with in-sample values aligned from `offset` onward.
#[derive(Debug, Clone)]
pub struct Bases {
    pub dgm_fmarkov: DgmFMarkov,
    pub ignn: IgnnForecaster,
    pub offset: usize,
    pub actual: Vec<f64>,
    pub fitted: Vec<Vec<f64>>,
}

pub fn fit_bases(x: &[f64], cfg: &PipelineConfig) -> Result<Bases> {
    let dgm_fmarkov = fit_dgm_fmarkov(x, &cfg.partition()?)?;
    let ignn = ignn_fit(x, cfg.window, &cfg.train_config())?;
    let net = ignn.fitted()?;
    let offset = net.offset;
    Ok(Bases {
        offset,
        actual: x[offset..].to_vec(),
        fitted: vec![dgm_fmarkov.fitted[offset..].to_vec(), net.values],
        dgm_fmarkov,
        ignn,
    })
}

pub fn weights_for(
    scheme: HybridScheme,
    actual: &[f64],
    forecasts: &[Vec<f64>],
    cfg: &PipelineConfig,
) -> Result<HybridWeights> {
    Ok(match scheme {
        HybridScheme::EffectiveDegree => {
            let s = forecasts
                .iter()
                .map(|f| Ok(effective_degree(&accuracy_series(actual, f)?)?.s))
                .collect::<Result<Vec<_>>>()?;
            effective_weights(&s)?
        }
        HybridScheme::MinVariance => {
            let err = |f: &Vec<f64>| actual.iter().zip(f).map(|(a, p)| a - p).collect::<Vec<_>>();
            min_variance_weight(&err(&forecasts[0]), &err(&forecasts[1]), cfg.assume_independent)?
                .to_weights()
        }
        HybridScheme::SimplexLs => simplex_ls_weights(actual, forecasts)?,
        HybridScheme::GreyRelation => optimize_relation_weights(actual, forecasts, &cfg.relation()?)?,
    })
}

#[derive(Debug, Clone)]
pub struct HybridFit {
    pub bases: Bases,
    pub combined: Vec<f64>,
    pub model: HybridModel,
}

impl HybridFit {
    /// In-sample metrics for each base model and the hybrid.
    pub fn metrics(&self) -> Result<BTreeMap<String, EvaluationReport>> {
        let mut out = BTreeMap::new();
        for (name, f) in BASE_NAMES.iter().zip(&self.bases.fitted) {
            out.insert((*name).to_owned(), evaluate(&self.bases.actual, f)?);
        }
        out.insert("hybrid".into(), evaluate(&self.bases.actual, &self.combined)?);
        Ok(out)
    }
}

pub fn combine_bases(bases: Bases, cfg: &PipelineConfig) -> Result<HybridFit> {
    let weights = weights_for(cfg.hybrid_scheme, &bases.actual, &bases.fitted, cfg)?;
    let combined = combine_forecasts(&bases.fitted, &weights.weights, cfg.combine)?;
    let model = HybridModel {
        dgm_fmarkov: bases.dgm_fmarkov.clone(),
        ignn: bases.ignn.clone(),
        weights,
        combine: cfg.combine,
    };
    Ok(HybridFit { bases, combined, model })
}

pub fn fit_hybrid(x: &[f64], cfg: &PipelineConfig) -> Result<HybridFit> {
    combine_bases(fit_bases(x, cfg)?, cfg)
}
