//! Fuzzy-weight Markov chain over residual states.
//!
//! Memberships are triangular over the state midpoints, so they always sum to
//! one and collapse to crisp membership exactly at a midpoint.

use serde::{Deserialize, Serialize};

use super::StatePartition;
use crate::error::{Error, Result};

/// Membership of `z` in each state.
pub fn fuzzy_memberships(z: f64, p: &StatePartition) -> Vec<f64> {
    memberships_at(z, &p.midpoints())
}

pub(crate) fn memberships_at(z: f64, mids: &[f64]) -> Vec<f64> {
    let k = mids.len();
    let mut mu = vec![0.0; k];
    if z <= mids[0] {
        mu[0] = 1.0;
    } else if z >= mids[k - 1] {
        mu[k - 1] = 1.0;
    } else {
        // mids[i] < z ≤ mids[i + 1]
        let i = mids.partition_point(|&m| m < z) - 1;
        let t = (z - mids[i]) / (mids[i + 1] - mids[i]);
        mu[i + 1] = t;
        mu[i] = 1.0 - t;
    }
    mu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMarkovModel {
    pub partition: StatePartition,
    /// Fuzzy transition frequencies `a_ij`.
    pub fuzzy_counts: Vec<Vec<f64>>,
    /// Row-normalised `a_ij`.
    pub fuzzy_probs: Vec<Vec<f64>>,
    pub midpoints: Vec<f64>,
    /// Rows with no fuzzy mass, replaced by the uniform distribution.
    #[serde(default)]
    pub degenerate_rows: Vec<usize>,
}

impl FuzzyMarkovModel {
    /// Expected next relative residual given the current one:
    /// `Σ_i μ_i(z) Σ_j mid_j·P_ij`, with `mid_j` the destination midpoint.
    pub fn expected_drift(&self, z: f64) -> f64 {
        memberships_at(z, &self.midpoints)
            .iter()
            .zip(&self.fuzzy_probs)
            .filter(|(mu, _)| **mu != 0.0)
            .map(|(mu, row)| mu * row.iter().zip(&self.midpoints).map(|(p, m)| p * m).sum::<f64>())
            .sum()
    }
}

/// `a_ij = Σ_t μ_i(z_t)·μ_j(z_{t+1})`, then row-normalised.
pub fn fuzzy_transition_matrix(z: &[f64], p: &StatePartition) -> Result<FuzzyMarkovModel> {
    if z.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: z.len(),
        });
    }
    if let Some(index) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let k = p.k();
    let midpoints = p.midpoints();
    let mus: Vec<Vec<f64>> = z.iter().map(|&v| memberships_at(v, &midpoints)).collect();
    let mut fuzzy_counts = vec![vec![0.0; k]; k];
    for pair in mus.windows(2) {
        for (i, &from) in pair[0].iter().enumerate().filter(|(_, m)| **m != 0.0) {
            for (j, &to) in pair[1].iter().enumerate() {
                fuzzy_counts[i][j] += from * to;
            }
        }
    }
    let mut degenerate_rows = Vec::new();
    let fuzzy_probs = fuzzy_counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mass: f64 = row.iter().sum();
            if mass > 0.0 {
                row.iter().map(|a| a / mass).collect()
            } else {
                degenerate_rows.push(i);
                vec![1.0 / k as f64; k]
            }
        })
        .collect();
    Ok(FuzzyMarkovModel {
        partition: p.clone(),
        fuzzy_counts,
        fuzzy_probs,
        midpoints,
        degenerate_rows,
    })
}

/// Corrected in-sample values `Ŷ_t = X̂_t + drift(Z_{t−1})·Y_{t−1}`.
///
/// `Z_s = (Y_s − X̂_s)/Y_{s−1}` exists from the second point, so the first
/// two outputs equal the grey fit.
pub fn fmarkov_correct(fitted: &[f64], actual: &[f64], fm: &FuzzyMarkovModel) -> Result<Vec<f64>> {
    if fitted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: fitted.len(),
        });
    }
    let n = actual.len();
    let mut out = fitted.to_vec();
    for t in 2..n {
        let prev = actual[t - 1];
        let before = actual[t - 2];
        if before == 0.0 {
            return Err(Error::ZeroDenominator { index: t - 2 });
        }
        let z = (prev - fitted[t - 1]) / before;
        out[t] = fitted[t] + fm.expected_drift(z) * prev;
    }
    Ok(out)
}
