//! Non-homogeneous discrete grey model.
//!
//! The accumulated series follows the affine recursion
//!
//! ```text
//! x̂¹(k+1) = β1·x̂¹(k) + β2·x̂⁰(k) + β3·k + β4,    x̂¹(1) = ξ
//! ```
//!
//! with `β` estimated by least squares on observed values and the initial
//! condition `ξ` chosen to minimise the original-scale squared error `Q(ξ)`.
//! Because every simulated value is affine in `ξ`, `Q` is an exact parabola
//! and its minimiser has a closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{ago, TimeSeries};

pub const MIN_FIT_LEN: usize = 5;

/// Singular values below this fraction of the largest are treated as zero
/// when forming the minimum-norm solution.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgmModel {
    /// `[β1, β2, β3, β4]`.
    pub beta: [f64; 4],
    /// Optimal initial condition for the accumulated series.
    pub xi: f64,
    pub n_fit: usize,
    /// Set when `ξ` had no influence on the simulation and was defaulted.
    #[serde(default)]
    pub xi_degenerate: bool,
}

/// Outcome of the initial-condition optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    pub xi: f64,
    pub degenerate: bool,
}

pub fn fit_dgm(x: &[f64]) -> Result<DgmModel> {
    if x.len() < MIN_FIT_LEN {
        return Err(Error::InsufficientData {
            required: MIN_FIT_LEN,
            actual: x.len(),
        });
    }
    let beta = estimate_beta(x)?;
    let init = optimize_initial(&beta, x)?;
    Ok(DgmModel {
        beta,
        xi: init.xi,
        n_fit: x.len(),
        xi_degenerate: init.degenerate,
    })
}

/// Minimum-norm least squares for `x¹(k+1) ~ [x¹(k), x⁰(k), k, 1]`.
pub fn estimate_beta(x: &[f64]) -> Result<[f64; 4]> {
    let x1 = ago(x)?;
    let x1 = x1.values();
    let rows = x.len() - 1;
    let b = DMatrix::from_fn(rows, 4, |r, c| match c {
        0 => x1[r],
        1 => x[r],
        2 => (r + 1) as f64,
        _ => 1.0,
    });
    let y = DVector::from_fn(rows, |r, _| x1[r + 1]);

    let svd = b.svd(true, true);
    let s_max = svd.singular_values.max();
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::Singular("design matrix is zero or non-finite"));
    }
    let sol = svd
        .solve(&y, RANK_TOL * s_max)
        .map_err(|_| Error::Singular("SVD solve failed"))?;
    let beta = [sol[0], sol[1], sol[2], sol[3]];
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite DGM parameters"));
    }
    Ok(beta)
}

/// Affine coefficients `(d_k, c_k)` of the simulated original-scale values,
/// `x̂⁰(k) = d_k + c_k·ξ`, for `k = 1..=steps`.
fn affine_simulation(beta: &[f64; 4], steps: usize) -> Vec<(f64, f64)> {
    let [b1, b2, b3, b4] = *beta;
    let mut out = Vec::with_capacity(steps);
    let mut acc = (0.0, 1.0);
    let mut orig = (0.0, 1.0);
    out.push(orig);
    for k in 1..steps {
        let kf = k as f64;
        let next = (
            b1 * acc.0 + b2 * orig.0 + b3 * kf + b4,
            b1 * acc.1 + b2 * orig.1,
        );
        orig = (next.0 - acc.0, next.1 - acc.1);
        acc = next;
        out.push(orig);
    }
    out
}

/// The exact minimiser of `Q(ξ) = Σ (x̂⁰(k) − x⁰(k))²`.
pub fn optimize_initial(beta: &[f64; 4], x: &[f64]) -> Result<InitialCondition> {
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let coeffs = affine_simulation(beta, x.len());
    let (num, den) = coeffs
        .iter()
        .zip(x)
        .fold((0.0, 0.0), |(num, den), (&(d, c), &obs)| {
            (num + c * (obs - d), den + c * c)
        });
    if den == 0.0 || !den.is_finite() || !num.is_finite() {
        return Ok(InitialCondition {
            xi: x[0],
            degenerate: true,
        });
    }
    Ok(InitialCondition {
        xi: num / den,
        degenerate: false,
    })
}

/// Closed simulation from `ξ`: original-scale values for `k = 1..=steps`.
pub fn simulate(beta: &[f64; 4], xi: f64, steps: usize) -> Result<Vec<f64>> {
    let [b1, b2, b3, b4] = *beta;
    let mut out = Vec::with_capacity(steps);
    if steps == 0 {
        return Ok(out);
    }
    let mut acc = xi;
    let mut orig = xi;
    out.push(orig);
    for k in 1..steps {
        let next = b1 * acc + b2 * orig + b3 * k as f64 + b4;
        orig = next - acc;
        acc = next;
        if !acc.is_finite() || !orig.is_finite() {
            return Err(Error::Overflow { step: k + 1 });
        }
        out.push(orig);
    }
    Ok(out)
}

/// `Q(ξ)` evaluated by direct simulation.
pub fn squared_error(beta: &[f64; 4], x: &[f64], xi: f64) -> Result<f64> {
    let sim = simulate(beta, xi, x.len())?;
    Ok(sim.iter().zip(x).map(|(s, o)| (s - o).powi(2)).sum())
}

impl DgmModel {
    /// In-sample simulated values for the fitting range.
    pub fn fitted(&self) -> Result<Vec<f64>> {
        simulate(&self.beta, self.xi, self.n_fit)
    }
}

/// Fitted values for `1..=n_fit` followed by `horizon` forecasts.
pub fn forecast_dgm(m: &DgmModel, horizon: usize) -> Result<TimeSeries> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    TimeSeries::new(simulate(&m.beta, m.xi, m.n_fit + horizon)?)
}
