//! Rolling-origin evaluation.
//!
//! Test blocks of `horizon` points tile the end of the series; at each origin
//! the models are refitted on the observations before it only.

use std::collections::BTreeMap;

use greycast_core::hybrid::{combine_forecasts, HybridWeights};
use greycast_core::markov::MarkovTestReport;
use greycast_core::metrics::{evaluate, EvaluationReport};
use greycast_core::neural::ignn_forecast;
use greycast_core::pipeline::forecast_dgm_fmarkov;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::hybrid::{combine_bases, fit_bases, BASE_NAMES};

/// Forecasts produced by one fold, by model name.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutput {
    pub forecasts: Vec<(String, Vec<f64>)>,
    pub weights: Option<HybridWeights>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    /// Index of the first held-out observation.
    pub origin: usize,
    pub actual: Vec<f64>,
    pub output: FoldOutput,
}

/// Origins `n − horizon·(folds − f)`, each leaving at least `min_train`
/// training points.
pub fn fold_origins(n: usize, folds: usize, horizon: usize, min_train: usize) -> Result<Vec<usize>> {
    let held_out = folds * horizon;
    if held_out + min_train > n {
        return Err(CliError::Config(format!(
            "{folds} folds of {horizon} steps need at least {} observations, got {n}",
            held_out + min_train
        )));
    }
    Ok((0..folds).map(|f| n - horizon * (folds - f)).collect())
}

/// Run `fit_forecast` at every origin in parallel. It receives the training
/// prefix only.
pub fn rolling_origin<F>(x: &[f64], origins: &[usize], horizon: usize, fit_forecast: F) -> Result<Vec<Fold>>
where
    F: Fn(&[f64], usize) -> Result<FoldOutput> + Sync,
{
    origins
        .par_iter()
        .map(|&origin| {
            let output = fit_forecast(&x[..origin], horizon)?;
            Ok(Fold {
                origin,
                actual: x[origin..origin + horizon].to_vec(),
                output,
            })
        })
        .collect()
}

/// Base models plus the hybrid, refitted on `train`.
pub fn hybrid_fold(cfg: &PipelineConfig) -> impl Fn(&[f64], usize) -> Result<FoldOutput> + Sync + '_ {
    move |train, horizon| {
        let h = combine_bases(fit_bases(train, cfg)?, cfg)?.model;
        let bases = vec![
            forecast_dgm_fmarkov(&h.dgm_fmarkov, horizon)?.into_values(),
            ignn_forecast(&h.ignn, horizon)?.into_values(),
        ];
        let hybrid = combine_forecasts(&bases, &h.weights.weights, h.combine)?;
        let mut forecasts: Vec<(String, Vec<f64>)> = BASE_NAMES
            .iter()
            .map(|s| (*s).to_owned())
            .zip(bases)
            .collect();
        forecasts.push(("hybrid".into(), hybrid));
        Ok(FoldOutput {
            forecasts,
            weights: Some(h.weights),
        })
    }
}

/// Smallest training prefix the hybrid can be fitted on.
pub fn min_train(cfg: &PipelineConfig) -> usize {
    (2 * cfg.window + 2).max(10)
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestReport {
    pub config: PipelineConfig,
    pub horizon: usize,
    pub origins: Vec<usize>,
    /// Held-out metrics per model over all folds.
    pub metrics: BTreeMap<String, EvaluationReport>,
    /// Hybrid weights chosen at each origin.
    pub weights: Vec<HybridWeights>,
    pub markov: Option<MarkovTestReport>,
}

pub fn summarize(folds: &[Fold]) -> Result<BTreeMap<String, EvaluationReport>> {
    let mut actual = Vec::new();
    let mut per_model: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for fold in folds {
        actual.extend_from_slice(&fold.actual);
        for (name, f) in &fold.output.forecasts {
            per_model.entry(name.clone()).or_default().extend_from_slice(f);
        }
    }
    per_model
        .into_iter()
        .map(|(name, f)| Ok((name, evaluate(&actual, &f)?)))
        .collect()
}
