//! Grey neural wrappers.
//!
//! IGNN sandwiches a network between a grey layer (1-AGO of the input
//! series) and a white layer (first differences of predicted AGO values).
//! SGNN feeds the fitted values of several GM(1,1) sub-models into a network
//! that learns how to combine them.

use serde::{Deserialize, Serialize};

use super::{train_bp, FeedforwardNet, MinMaxScaler, TrainConfig};
use crate::error::{Error, Result};
use crate::gm::{self, fit_gm11, GmModel};
use crate::series::{ago, make_windows, Sample, TimeSeries};

/// In-sample one-step predictions starting at zero-based index `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InSample {
    pub offset: usize,
    pub values: Vec<f64>,
}

/// White layer: `predicted[i] − previous[i]`, the original-scale value
/// implied by a predicted AGO value and the AGO value before it.
pub fn white_layer(previous: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    if previous.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: previous.len(),
            actual: predicted.len(),
        });
    }
    Ok(predicted.iter().zip(previous).map(|(p, q)| p - q).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgnnForecaster {
    pub net: FeedforwardNet,
    pub window: usize,
    /// AGO of the training series.
    pub ago: Vec<f64>,
    pub loss_history: Vec<f64>,
}

pub fn ignn_fit(x: &[f64], window: usize, cfg: &TrainConfig) -> Result<IgnnForecaster> {
    cfg.validate()?;
    if x.len() < window + 1 {
        return Err(Error::InsufficientData {
            required: window + 1,
            actual: x.len(),
        });
    }
    let x1 = ago(x)?.values().to_vec();
    let samples = make_windows(&x1, window)?;
    let in_scaler = MinMaxScaler::fit(samples.iter().flat_map(|s| s.inputs.iter().copied()))?;
    let out_scaler = MinMaxScaler::fit(samples.iter().map(|s| s.target))?;
    let net = FeedforwardNet::new(&[window, cfg.hidden, 1], cfg.seed)?
        .with_scalers(Some(in_scaler), Some(out_scaler));
    let trained = train_bp(&net, &samples, cfg)?;
    Ok(IgnnForecaster {
        net: trained.net,
        window,
        ago: x1,
        loss_history: trained.loss_history,
    })
}

impl IgnnForecaster {
    /// One-step-ahead in-sample values for indices `window..n`.
    pub fn fitted(&self) -> Result<InSample> {
        let w = self.window;
        let predicted = self
            .ago
            .windows(w)
            .take(self.ago.len() - w)
            .map(|win| Ok(self.net.forward(win)?[0]))
            .collect::<Result<Vec<_>>>()?;
        let previous = &self.ago[w - 1..self.ago.len() - 1];
        Ok(InSample {
            offset: w,
            values: white_layer(previous, &predicted)?,
        })
    }
}

/// Recursive forecast: each predicted AGO value joins the input window.
pub fn ignn_forecast(f: &IgnnForecaster, horizon: usize) -> Result<TimeSeries> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let mut acc = f.ago[f.ago.len() - f.window..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for step in 1..=horizon {
        let next = f.net.forward(&acc[acc.len() - f.window..])?[0];
        if !next.is_finite() {
            return Err(Error::Overflow { step });
        }
        out.push(next - acc[acc.len() - 1]);
        acc.push(next);
    }
    TimeSeries::new(out)
}

/// Network over the outputs of GM(1,1) sub-models fitted to trailing windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgnnForecaster {
    pub sub_models: Vec<GmModel>,
    /// Zero-based start of each sub-model's window in the training series.
    pub starts: Vec<usize>,
    pub net: FeedforwardNet,
    pub n_fit: usize,
}

impl SgnnForecaster {
    fn inputs_at(&self, t: usize) -> Vec<f64> {
        self.sub_models
            .iter()
            .zip(&self.starts)
            .map(|(m, &s)| m.value_at(t as i64 - s as i64 + 1))
            .collect()
    }

    /// Training range: the span of the longest sub-window.
    pub fn first_fitted(&self) -> usize {
        *self.starts.iter().min().unwrap()
    }

    pub fn fitted(&self) -> Result<InSample> {
        let offset = self.first_fitted();
        let values = (offset..self.n_fit)
            .map(|t| Ok(self.net.forward(&self.inputs_at(t))?[0]))
            .collect::<Result<Vec<_>>>()?;
        Ok(InSample { offset, values })
    }
}

/// Train a combining network on `(sub-model outputs, actual)` rows.
pub fn train_combiner(inputs: &[Vec<f64>], targets: &[f64], cfg: &TrainConfig) -> Result<FeedforwardNet> {
    cfg.validate()?;
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            expected: inputs.len(),
            actual: targets.len(),
        });
    }
    let width = inputs.first().map_or(0, Vec::len);
    let samples: Vec<Sample> = inputs
        .iter()
        .zip(targets)
        .map(|(x, &t)| Sample { inputs: x.clone(), target: t })
        .collect();
    let in_scaler = MinMaxScaler::fit(inputs.iter().flatten().copied())?;
    let out_scaler = MinMaxScaler::fit(targets.iter().copied())?;
    let net = FeedforwardNet::new(&[width, cfg.hidden, 1], cfg.seed)?
        .with_scalers(Some(in_scaler), Some(out_scaler));
    Ok(train_bp(&net, &samples, cfg)?.net)
}

pub fn sgnn_fit(x: &[f64], sub_window_lengths: &[usize], cfg: &TrainConfig) -> Result<SgnnForecaster> {
    if sub_window_lengths.len() < 2 {
        return Err(Error::InvalidParameter("SGNN needs at least two sub-models".into()));
    }
    if let Some(&l) = sub_window_lengths.iter().find(|&&l| l < gm::MIN_FIT_LEN) {
        return Err(Error::InvalidParameter(format!(
            "sub-window length {l} is below the GM(1,1) minimum of {}",
            gm::MIN_FIT_LEN
        )));
    }
    let n = x.len();
    let longest = *sub_window_lengths.iter().max().unwrap();
    if longest > n {
        return Err(Error::InsufficientData { required: longest, actual: n });
    }
    let starts: Vec<usize> = sub_window_lengths.iter().map(|l| n - l).collect();
    let sub_models = starts
        .iter()
        .map(|&s| fit_gm11(&x[s..]))
        .collect::<Result<Vec<_>>>()?;

    let mut f = SgnnForecaster {
        sub_models,
        starts,
        net: FeedforwardNet::new(&[sub_window_lengths.len(), 1], 0)?,
        n_fit: n,
    };
    let range = f.first_fitted()..n;
    let inputs: Vec<Vec<f64>> = range.clone().map(|t| f.inputs_at(t)).collect();
    f.net = train_combiner(&inputs, &x[range], cfg)?;
    Ok(f)
}

pub fn sgnn_forecast(f: &SgnnForecaster, horizon: usize) -> Result<TimeSeries> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let out = (f.n_fit..f.n_fit + horizon)
        .map(|t| Ok(f.net.forward(&f.inputs_at(t))?[0]))
        .collect::<Result<Vec<_>>>()?;
    if let Some(step) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow { step: step + 1 });
    }
    TimeSeries::new(out)
}
