//! Combination forecasting.
//!
//! Weight schemes: effective degree, minimum error variance (two models),
//! least squares on the probability simplex, and maximum grey relational
//! degree. Weights are then applied with an arithmetic, geometric or
//! harmonic mean.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridScheme {
    EffectiveDegree,
    MinVariance,
    SimplexLs,
    GreyRelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineScheme {
    #[default]
    Arithmetic,
    Geometric,
    Harmonic,
}

/// Weights on the probability simplex plus scheme-specific diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridWeights {
    pub weights: Vec<f64>,
    pub scheme: HybridScheme,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
}

impl HybridWeights {
    fn new(weights: Vec<f64>, scheme: HybridScheme) -> Self {
        Self {
            weights,
            scheme,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_owned(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RelationConfig {
    rho: f64,
}

impl RelationConfig {
    /// Identification coefficient, strictly between 0 and 1.
    pub fn new(rho: f64) -> Result<Self> {
        if rho > 0.0 && rho < 1.0 {
            Ok(Self { rho })
        } else {
            Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {rho}")))
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl Default for RelationConfig {
    fn default() -> Self {
        Self { rho: 0.5 }
    }
}

impl TryFrom<f64> for RelationConfig {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RelationConfig> for f64 {
    fn from(c: RelationConfig) -> f64 {
        c.rho
    }
}

fn check_aligned(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Errors `actual − forecast` for each forecast.
fn errors_of(actual: &[f64], forecasts: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if actual.is_empty() {
        return Err(Error::EmptySeries);
    }
    forecasts
        .iter()
        .map(|f| {
            check_aligned(actual.len(), f.len())?;
            Ok(actual.iter().zip(f).map(|(a, p)| a - p).collect())
        })
        .collect()
}

/// `A(k) = 1 − |(x(k) − x̂(k)) / x(k)|`, unclamped.
pub fn accuracy_series(actual: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    check_aligned(actual.len(), predicted.len())?;
    actual
        .iter()
        .zip(predicted)
        .enumerate()
        .map(|(index, (&x, &p))| {
            if x == 0.0 {
                Err(Error::ZeroDenominator { index })
            } else {
                Ok(1.0 - ((x - p) / x).abs())
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDegree {
    /// Mean accuracy E.
    pub mean: f64,
    /// `(1/N)·√Σ(A − E)²`.
    pub sigma: f64,
    /// `S = E·(1 − σ)`.
    pub s: f64,
}

pub fn effective_degree(a: &[f64]) -> Result<EffectiveDegree> {
    if a.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = a.len() as f64;
    let mean = a.iter().sum::<f64>() / n;
    // Note the 1/N sits outside the square root.
    let sigma = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt() / n;
    Ok(EffectiveDegree {
        mean,
        sigma,
        s: mean * (1.0 - sigma),
    })
}

/// `w_i = S_i / Σ S_j`.
pub fn effective_weights(s: &[f64]) -> Result<HybridWeights> {
    if s.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some((i, v)) = s.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Degenerate(format!(
            "effective degree of model {i} is {v}; weights need positive degrees"
        )));
    }
    let total: f64 = s.iter().sum();
    Ok(HybridWeights::new(
        s.iter().map(|v| v / total).collect(),
        HybridScheme::EffectiveDegree,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinVariance {
    /// Weight on model 1.
    pub rho: f64,
    /// Both error variances (or the variance of `e1 − e2`) were zero.
    pub tie: bool,
    /// `D(e1)/(D(e1) + D(e2))`, the variance-maximising counterpart kept for
    /// comparison.
    pub swapped_rho: f64,
}

impl MinVariance {
    pub fn to_weights(&self) -> HybridWeights {
        HybridWeights::new(vec![self.rho, 1.0 - self.rho], HybridScheme::MinVariance)
            .with("tie", f64::from(u8::from(self.tie)))
            .with("swapped_rho", self.swapped_rho)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64
}

/// Weight `ρ` minimising the sample variance of `ρ·e1 + (1 − ρ)·e2`,
/// clipped to `[0, 1]`.
pub fn min_variance_weight(e1: &[f64], e2: &[f64], assume_independent: bool) -> Result<MinVariance> {
    check_aligned(e1.len(), e2.len())?;
    if e1.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: e1.len() });
    }
    let d1 = covariance(e1, e1);
    let d2 = covariance(e2, e2);
    let cov = if assume_independent { 0.0 } else { covariance(e1, e2) };
    let swapped_rho = if d1 + d2 > 0.0 { d1 / (d1 + d2) } else { 0.5 };
    let denom = d1 + d2 - 2.0 * cov;
    // Relative cut-off: the difference of two equal-variance error series can
    // leave a denominator at rounding level.
    if !(denom > 1e-14 * (d1 + d2)) {
        return Ok(MinVariance { rho: 0.5, tie: true, swapped_rho });
    }
    Ok(MinVariance {
        rho: ((d2 - cov) / denom).clamp(0.0, 1.0),
        tie: false,
        swapped_rho,
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn quad_form(g: &DMatrix<f64>, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            s += w[i] * g[(i, j)] * w[j];
        }
    }
    s
}

fn unit(p: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; p];
    v[i] = 1.0;
    v
}

/// Minimise `Σ_k (x(k) − Σ_i w_i x̂_i(k))²` over the simplex.
///
/// On the simplex the residual is `Σ_i w_i e_i(k)`, so the objective is the
/// quadratic form of the error Gram matrix. Solved with accelerated
/// projected gradient; unit vectors are checked as well.
pub fn simplex_ls_weights(actual: &[f64], forecasts: &[Vec<f64>]) -> Result<HybridWeights> {
    let p = forecasts.len();
    if p < 2 {
        return Err(Error::InvalidParameter("need at least two forecasts to combine".into()));
    }
    let errors = errors_of(actual, forecasts)?;
    if forecasts.iter().all(|f| f == &forecasts[0]) {
        let sse = errors[0].iter().map(|e| e * e).sum();
        return Ok(HybridWeights::new(vec![1.0 / p as f64; p], HybridScheme::SimplexLs)
            .with("sse", sse)
            .with("degenerate", 1.0));
    }
    let g = DMatrix::from_fn(p, p, |i, j| {
        errors[i].iter().zip(&errors[j]).map(|(a, b)| a * b).sum::<f64>()
    });
    let lipschitz = 2.0 * SymmetricEigen::new(g.clone()).eigenvalues.max();
    let mut best = (0..p)
        .map(|i| unit(p, i))
        .min_by(|a, b| quad_form(&g, a).total_cmp(&quad_form(&g, b)))
        .unwrap();
    if lipschitz > 0.0 {
        let step = 1.0 / lipschitz;
        let mut w = vec![1.0 / p as f64; p];
        let mut y = w.clone();
        let mut t = 1.0f64;
        for _ in 0..20_000 {
            let grad: Vec<f64> = (0..p)
                .map(|i| 2.0 * (0..p).map(|j| g[(i, j)] * y[j]).sum::<f64>())
                .collect();
            let next = project_simplex(
                &y.iter().zip(&grad).map(|(yi, gi)| yi - step * gi).collect::<Vec<_>>(),
            );
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let moved: f64 = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
            y = next
                .iter()
                .zip(&w)
                .map(|(n, o)| n + (t - 1.0) / t_next * (n - o))
                .collect();
            w = next;
            t = t_next;
            if moved < 1e-15 {
                break;
            }
        }
        if quad_form(&g, &w) < quad_form(&g, &best) {
            best = w;
        }
    }
    let sse = quad_form(&g, &best);
    Ok(HybridWeights::new(best, HybridScheme::SimplexLs)
        .with("sse", sse)
        .with("degenerate", 0.0))
}

/// Joint min/max of absolute errors over all candidate methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub min: f64,
    pub max: f64,
}

impl Envelope {
    pub fn from_errors(errors: &[Vec<f64>]) -> Result<Self> {
        let mut it = errors.iter().flatten().map(|e| e.abs()).peekable();
        if it.peek().is_none() {
            return Err(Error::EmptySeries);
        }
        let (min, max) = it.fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e), hi.max(e)));
        Ok(Self { min, max })
    }

    /// Mean relational coefficient of an error profile.
    pub fn degree(&self, errors: &[f64], cfg: &RelationConfig) -> f64 {
        if self.max == 0.0 {
            return 1.0;
        }
        let num = self.min + cfg.rho * self.max;
        errors
            .iter()
            .map(|e| num / (e.abs() + cfg.rho * self.max))
            .sum::<f64>()
            / errors.len() as f64
    }
}

/// Grey relational degree of one forecast against `actual`, using an
/// envelope taken over all candidate methods.
pub fn grey_relation_degree(
    actual: &[f64],
    predicted: &[f64],
    envelope: &Envelope,
    cfg: &RelationConfig,
) -> Result<f64> {
    let e = errors_of(actual, std::slice::from_ref(&predicted.to_vec()))?.remove(0);
    Ok(envelope.degree(&e, cfg))
}

fn combined_error(errors: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    (0..errors[0].len())
        .map(|t| errors.iter().zip(w).map(|(e, wi)| wi * e[t]).sum())
        .collect()
}

const GRID_STEP: f64 = 1e-4;
const STARTS: usize = 16;

/// Weights maximising the grey relational degree of the combined error,
/// with the envelope fixed from the individual methods.
pub fn optimize_relation_weights(
    actual: &[f64],
    forecasts: &[Vec<f64>],
    cfg: &RelationConfig,
) -> Result<HybridWeights> {
    let m = forecasts.len();
    if m < 2 {
        return Err(Error::InvalidParameter("need at least two forecasts to combine".into()));
    }
    let errors = errors_of(actual, forecasts)?;
    let env = Envelope::from_errors(&errors)?;
    let gamma = |w: &[f64]| env.degree(&combined_error(&errors, w), cfg);

    let singles: Vec<f64> = errors.iter().map(|e| env.degree(e, cfg)).collect();
    let best_single = singles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best = unit(m, singles.iter().position(|&g| g == best_single).unwrap());
    let mut best_gamma = best_single;
    let mut consider = |w: Vec<f64>, g: f64| {
        if g > best_gamma {
            best_gamma = g;
            best = w;
        }
    };

    if m == 2 {
        let steps = (1.0 / GRID_STEP).round() as usize;
        let (mut w1, mut g1) = (0.0, f64::NEG_INFINITY);
        for i in 0..=steps {
            let w = i as f64 / steps as f64;
            let g = gamma(&[w, 1.0 - w]);
            if g > g1 {
                (w1, g1) = (w, g);
            }
        }
        consider(vec![w1, 1.0 - w1], g1);
        let (w, g) = golden_max(
            |w| gamma(&[w, 1.0 - w]),
            (w1 - GRID_STEP).max(0.0),
            (w1 + GRID_STEP).min(1.0),
        );
        consider(vec![w, 1.0 - w], g);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / m as f64; m]];
        starts.extend((0..m).map(|i| unit(m, i)).take(STARTS - 1));
        while starts.len() < STARTS {
            let raw: Vec<f64> = (0..m).map(|_| -rng.random_range(f64::EPSILON..1.0).ln()).collect();
            let s: f64 = raw.iter().sum();
            starts.push(raw.iter().map(|v| v / s).collect());
        }
        for start in starts {
            let (w, g) = pairwise_search(&gamma, start);
            consider(w, g);
        }
    }

    let uniform = vec![1.0 / m as f64; m];
    let g_uniform = gamma(&uniform);
    let tied = g_uniform >= best_gamma - 1e-12;
    if tied {
        best = uniform;
        best_gamma = g_uniform;
    }
    Ok(HybridWeights::new(best, HybridScheme::GreyRelation)
        .with("gamma", best_gamma)
        .with("gamma_best_single", best_single)
        .with("uniform_tie", f64::from(u8::from(tied))))
}

/// Golden-section search for a maximum on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-12 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    if fa > fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Coordinate search over mass transfers between pairs of weights; every
/// move stays on the simplex.
fn pairwise_search(gamma: &impl Fn(&[f64]) -> f64, mut w: Vec<f64>) -> (Vec<f64>, f64) {
    let m = w.len();
    let mut g = gamma(&w);
    let mut step: f64 = 0.25;
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j || w[j] == 0.0 {
                    continue;
                }
                let d = step.min(w[j]);
                let mut trial = w.clone();
                trial[i] += d;
                trial[j] -= d;
                let gt = gamma(&trial);
                if gt > g {
                    (w, g) = (trial, gt);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (w, g)
}

/// Apply weights pointwise with the chosen mean.
pub fn combine_forecasts(forecasts: &[Vec<f64>], weights: &[f64], scheme: CombineScheme) -> Result<Vec<f64>> {
    check_aligned(forecasts.len(), weights.len())?;
    let Some(n) = forecasts.first().map(Vec::len) else {
        return Err(Error::EmptySeries);
    };
    for f in forecasts {
        check_aligned(n, f.len())?;
    }
    if scheme != CombineScheme::Arithmetic {
        for f in forecasts {
            if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::NonPositive { index, value });
            }
        }
    }
    Ok((0..n)
        .map(|k| {
            let terms = forecasts.iter().zip(weights).map(|(f, &w)| (f[k], w));
            match scheme {
                CombineScheme::Arithmetic => terms.map(|(x, w)| w * x).sum(),
                CombineScheme::Geometric => terms.map(|(x, w)| x.powf(w)).product(),
                CombineScheme::Harmonic => 1.0 / terms.map(|(x, w)| w / x).sum::<f64>(),
            }
        })
        .collect())
}
