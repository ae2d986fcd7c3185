//! Feedforward networks trained by error back-propagation.
//!
//! Hidden layers use the logistic sigmoid and the output layer is linear.
//! Inputs and targets pass through optional min-max scalers mapping the
//! training range onto `[0.1, 0.9]`; everything inside the network works in
//! that normalised space.
//!
//! The grey wrappers ([`ignn_fit`], [`sgnn_fit`]) live in [`grey`].

pub mod grey;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Sample;

pub use grey::{
    ignn_fit, ignn_forecast, sgnn_fit, sgnn_forecast, train_combiner, white_layer,
    IgnnForecaster, InSample, SgnnForecaster,
};

/// Network shape used for the grey neural models: four lagged inputs, four
/// hidden units, one output.
pub const DEFAULT_LAYERS: [usize; 3] = [4, 4, 1];

const SCALE_LO: f64 = 0.1;
const SCALE_HI: f64 = 0.9;

/// Affine map of `[min, max]` onto `[0.1, 0.9]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    /// Fit to the range of `values`. A constant range is widened by one unit
    /// on either side so the map stays invertible.
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::Degenerate("cannot fit a scaler to no finite values".into()));
        }
        if min == max {
            Ok(Self { min: min - 1.0, max: max + 1.0 })
        } else {
            Ok(Self { min, max })
        }
    }

    pub fn scale(&self, v: f64) -> f64 {
        SCALE_LO + (SCALE_HI - SCALE_LO) * (v - self.min) / (self.max - self.min)
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.min + (s - SCALE_LO) * (self.max - self.min) / (SCALE_HI - SCALE_LO)
    }

    fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.max > self.min
    }
}

/// Weights of one layer, `weights[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardNet {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub input_scaler: Option<MinMaxScaler>,
    #[serde(default)]
    pub output_scaler: Option<MinMaxScaler>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl FeedforwardNet {
    /// Random initialisation, weights and biases uniform in `[−0.5, 0.5]`.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| Layer {
                weights: (0..w[1])
                    .map(|_| (0..w[0]).map(|_| rng.random_range(-0.5..=0.5)).collect())
                    .collect(),
                biases: (0..w[1]).map(|_| rng.random_range(-0.5..=0.5)).collect(),
            })
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            layers,
            input_scaler: None,
            output_scaler: None,
        })
    }

    /// Assemble a network from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let first = layers
            .first()
            .and_then(|l| l.weights.first())
            .map(|row| row.len())
            .ok_or_else(|| Error::InvalidParameter("network needs at least one layer".into()))?;
        let mut layer_sizes = vec![first];
        layer_sizes.extend(layers.iter().map(|l| l.biases.len()));
        let net = Self {
            layer_sizes,
            layers,
            input_scaler: None,
            output_scaler: None,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn with_scalers(mut self, input: Option<MinMaxScaler>, output: Option<MinMaxScaler>) -> Self {
        self.input_scaler = input;
        self.output_scaler = output;
        self
    }

    /// Check shape consistency and scaler invertibility (e.g. after loading).
    pub fn validate(&self) -> Result<()> {
        validate_sizes(&self.layer_sizes)?;
        if self.layers.len() != self.layer_sizes.len() - 1 {
            return Err(Error::InvalidParameter("layer count does not match sizes".into()));
        }
        for (layer, w) in self.layers.iter().zip(self.layer_sizes.windows(2)) {
            if layer.weights.len() != w[1]
                || layer.biases.len() != w[1]
                || layer.weights.iter().any(|row| row.len() != w[0])
            {
                return Err(Error::InvalidParameter(format!(
                    "layer of shape {}x{} has inconsistent weights",
                    w[1], w[0]
                )));
            }
            if layer.weights.iter().flatten().chain(&layer.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite network weight".into()));
            }
        }
        for s in self.input_scaler.iter().chain(&self.output_scaler) {
            if !s.is_valid() {
                return Err(Error::InvalidParameter("scaler range must be non-empty".into()));
            }
        }
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Output in original units: scale input, run the layers, unscale.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.n_inputs() {
            return Err(Error::ShapeMismatch {
                expected: self.n_inputs(),
                actual: input.len(),
            });
        }
        let scaled = self.scale_input(input);
        let out = self.activations(&scaled).pop().unwrap();
        Ok(match &self.output_scaler {
            Some(s) => out.into_iter().map(|v| s.unscale(v)).collect(),
            None => out,
        })
    }

    fn scale_input(&self, input: &[f64]) -> Vec<f64> {
        match &self.input_scaler {
            Some(s) => input.iter().map(|&v| s.scale(v)).collect(),
            None => input.to_vec(),
        }
    }

    fn scale_target(&self, t: f64) -> f64 {
        self.output_scaler.map_or(t, |s| s.scale(t))
    }

    /// Per-layer outputs in normalised space, input first.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let prev = &acts[l];
            let next = layer
                .weights
                .iter()
                .zip(&layer.biases)
                .map(|(row, b)| {
                    let z = row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>() + b;
                    if l == last {
                        z
                    } else {
                        sigmoid(z)
                    }
                })
                .collect();
            acts.push(next);
        }
        acts
    }

    /// Half the summed squared error over `batch`, in normalised space.
    pub fn loss(&self, batch: &[Sample]) -> f64 {
        batch
            .iter()
            .map(|s| {
                let out = self.activations(&self.scale_input(&s.inputs)).pop().unwrap();
                0.5 * (out[0] - self.scale_target(s.target)).powi(2)
            })
            .sum()
    }

    /// Gradient of [`loss`](Self::loss) with respect to every weight and bias,
    /// laid out like [`params`](Self::params).
    pub fn gradient(&self, batch: &[Sample]) -> Vec<f64> {
        let mut total = vec![0.0; self.params().len()];
        for s in batch {
            let g = self.sample_gradient(&self.scale_input(&s.inputs), self.scale_target(s.target));
            for (t, v) in total.iter_mut().zip(flatten(&g)) {
                *t += v;
            }
        }
        total
    }

    /// Back-propagated gradient of `½(y − target)²` for one normalised sample.
    fn sample_gradient(&self, input: &[f64], target: f64) -> Vec<Layer> {
        let acts = self.activations(input);
        let n = self.layers.len();
        let mut grads = Vec::with_capacity(n);
        let mut delta: Vec<f64> = acts[n].iter().map(|y| y - target).collect();
        for l in (0..n).rev() {
            let prev = &acts[l];
            grads.push(Layer {
                weights: delta.iter().map(|d| prev.iter().map(|a| d * a).collect()).collect(),
                biases: delta.clone(),
            });
            if l > 0 {
                delta = (0..prev.len())
                    .map(|i| {
                        let back: f64 = self.layers[l]
                            .weights
                            .iter()
                            .zip(&delta)
                            .map(|(row, d)| row[i] * d)
                            .sum();
                        back * prev[i] * (1.0 - prev[i])
                    })
                    .collect();
            }
        }
        grads.reverse();
        grads
    }

    /// All weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let expected = self.params().len();
        if params.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            for row in &mut layer.weights {
                for w in row.iter_mut() {
                    *w = it.next().unwrap();
                }
            }
            for b in &mut layer.biases {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// One online gradient step on a single normalised sample.
    fn sgd_step(&mut self, input: &[f64], target: f64, lr: f64) {
        let grads = self.sample_gradient(input, target);
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            for (row, grow) in layer.weights.iter_mut().zip(g.weights) {
                for (w, gw) in row.iter_mut().zip(grow) {
                    *w -= lr * gw;
                }
            }
            for (b, gb) in layer.biases.iter_mut().zip(g.biases) {
                *b -= lr * gb;
            }
        }
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "layer sizes must list at least two positive widths, got {sizes:?}"
        )));
    }
    Ok(())
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().flatten().chain(&l.biases).copied())
        .collect()
}

/// Settings for back-propagation training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Seeds weight initialisation and sample shuffling.
    pub seed: u64,
    pub shuffle: bool,
    /// Width of the hidden layer in the grey neural models.
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 2000,
            seed: 0,
            shuffle: true,
            hidden: DEFAULT_LAYERS[1],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be finite and positive, got {}",
                self.learning_rate
            )));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidParameter("hidden layer width must be positive".into()));
        }
        Ok(())
    }
}

/// A trained network and its loss history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub net: FeedforwardNet,
    /// Mean squared error in normalised space: entry 0 before training, then
    /// one entry after each epoch.
    pub loss_history: Vec<f64>,
}

/// Online (per-sample) gradient descent on squared error.
pub fn train_bp(net: &FeedforwardNet, samples: &[Sample], cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    if net.n_outputs() != 1 {
        return Err(Error::InvalidParameter("training expects a single output".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.inputs.len() != net.n_inputs()) {
        return Err(Error::ShapeMismatch {
            expected: net.n_inputs(),
            actual: s.inputs.len(),
        });
    }
    let mut net = net.clone();
    let scaled: Vec<(Vec<f64>, f64)> = samples
        .iter()
        .map(|s| (net.scale_input(&s.inputs), net.scale_target(s.target)))
        .collect();
    let mse = |net: &FeedforwardNet| {
        scaled
            .iter()
            .map(|(x, t)| (net.activations(x)[net.layers.len()][0] - t).powi(2))
            .sum::<f64>()
            / scaled.len() as f64
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs + 1);
    loss_history.push(mse(&net));
    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let (x, t) = &scaled[i];
            net.sgd_step(x, *t, cfg.learning_rate);
        }
        let loss = mse(&net);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        loss_history.push(loss);
    }
    Ok(Trained { net, loss_history })
}
