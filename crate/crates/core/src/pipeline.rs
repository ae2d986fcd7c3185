//! Discrete grey model corrected by a fuzzy Markov chain over its residuals.

use serde::{Deserialize, Serialize};

use crate::dgm::{fit_dgm, forecast_dgm, DgmModel};
use crate::error::{Error, Result};
use crate::markov::{
    classify_states, count_transitions, fmarkov_correct, fuzzy_transition_matrix,
    marginal_distribution, markov_property_test, occupancy, Alpha, FuzzyMarkovModel, LogBase,
    MarkovTestReport, StatePartition, TransitionCounts,
};
use crate::series::{relative_residuals, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgmFMarkov {
    pub dgm: DgmModel,
    pub fuzzy: FuzzyMarkovModel,
    /// Last training observation.
    pub last_actual: f64,
    /// Relative residual at the last training observation.
    pub last_residual: f64,
    /// Corrected in-sample values.
    pub fitted: Vec<f64>,
}

pub fn fit_dgm_fmarkov(x: &[f64], partition: &StatePartition) -> Result<DgmFMarkov> {
    let dgm = fit_dgm(x)?;
    let grey = dgm.fitted()?;
    let z = relative_residuals(x, &grey)?;
    let fuzzy = fuzzy_transition_matrix(&z.values, partition)?;
    let fitted = fmarkov_correct(&grey, x, &fuzzy)?;
    Ok(DgmFMarkov {
        dgm,
        fuzzy,
        last_actual: x[x.len() - 1],
        last_residual: *z.values.last().unwrap(),
        fitted,
    })
}

/// Out-of-sample forecasts.
///
/// The first step uses the observed last residual. Later steps have no
/// observed residual, so the expected drift stands in for it and the
/// previous forecast stands in for the previous observation:
/// `Ŷ_t = X̂_t + z_t·Ŷ_{t−1}` with `z_t = drift(z_{t−1})`.
pub fn forecast_dgm_fmarkov(m: &DgmFMarkov, horizon: usize) -> Result<TimeSeries> {
    let grey = forecast_dgm(&m.dgm, horizon)?.into_values();
    let mut z = m.last_residual;
    let mut prev = m.last_actual;
    let mut out = Vec::with_capacity(horizon);
    for (step, &g) in grey[m.dgm.n_fit..].iter().enumerate() {
        z = m.fuzzy.expected_drift(z);
        let y = g + z * prev;
        if !y.is_finite() {
            return Err(Error::Overflow { step: step + 1 });
        }
        out.push(y);
        prev = y;
    }
    TimeSeries::new(out)
}

/// Crisp Markov analysis of a series' DGM residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualChain {
    pub counts: TransitionCounts,
    pub occupancy: Vec<u64>,
    pub marginals: Vec<f64>,
    pub clamped_below: usize,
    pub clamped_above: usize,
    pub report: MarkovTestReport,
}

pub fn residual_markov_test(
    x: &[f64],
    partition: &StatePartition,
    alpha: Alpha,
    log_base: LogBase,
) -> Result<ResidualChain> {
    let dgm = fit_dgm(x)?;
    let z = relative_residuals(x, &dgm.fitted()?)?;
    let cls = classify_states(&z.values, partition)?;
    let k = partition.k();
    let counts = count_transitions(&cls.states, k)?;
    let occ = occupancy(&cls.states, k);
    let marginals = marginal_distribution(&occ, cls.states.len() as u64)?;
    let report = markov_property_test(&counts, &marginals, alpha, log_base)?;
    Ok(ResidualChain {
        counts,
        occupancy: occ,
        marginals,
        clamped_below: cls.clamped_below,
        clamped_above: cls.clamped_above,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wavy(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 8.0 + 0.01 * i as f64 + 0.3 * (i as f64 * 0.9).sin())
            .collect()
    }

    #[test]
    fn in_sample_matches_manual_correction() {
        let x = wavy(40);
        let p = StatePartition::default();
        let m = fit_dgm_fmarkov(&x, &p).unwrap();
        let grey = m.dgm.fitted().unwrap();
        assert_eq!(m.fitted.len(), 40);
        assert_eq!(&m.fitted[..2], &grey[..2]);
        for t in 2..40 {
            let z = (x[t - 1] - grey[t - 1]) / x[t - 2];
            let want = grey[t] + m.fuzzy.expected_drift(z) * x[t - 1];
            assert!((m.fitted[t] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn forecast_recursion() {
        let x = wavy(30);
        let m = fit_dgm_fmarkov(&x, &StatePartition::default()).unwrap();
        let grey = forecast_dgm(&m.dgm, 3).unwrap().into_values();
        let fc = forecast_dgm_fmarkov(&m, 3).unwrap().into_values();
        let z1 = m.fuzzy.expected_drift(m.last_residual);
        assert!((fc[0] - (grey[30] + z1 * x[29])).abs() < 1e-12);
        let z2 = m.fuzzy.expected_drift(z1);
        assert!((fc[1] - (grey[31] + z2 * fc[0])).abs() < 1e-12);
        assert_eq!(forecast_dgm_fmarkov(&m, 0), Err(Error::InvalidHorizon));
    }

    #[test]
    fn residual_chain_bookkeeping() {
        let x = wavy(60);
        let c = residual_markov_test(&x, &StatePartition::default(), Alpha::OnePercent, LogBase::Natural)
            .unwrap();
        assert_eq!(c.occupancy.iter().sum::<u64>(), 59);
        assert_eq!(c.counts.counts.iter().flatten().sum::<u64>(), 58);
        assert!((c.marginals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(c.report.dof, 25);
    }
}
