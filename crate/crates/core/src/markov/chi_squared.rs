//! Likelihood-ratio style test of the Markov property.

use serde::{Deserialize, Serialize};

use super::{transition_probabilities, TransitionCounts};
use crate::error::{Error, Result};

/// Significance level of the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum Alpha {
    OnePercent,
    FivePercent,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::OnePercent => 0.01,
            Alpha::FivePercent => 0.05,
        }
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        if v == 0.01 {
            Ok(Alpha::OnePercent)
        } else if v == 0.05 {
            Ok(Alpha::FivePercent)
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha must be 0.01 or 0.05, got {v}"
            )))
        }
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Base10,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base10 => x.log10(),
        }
    }
}

/// Upper critical values of the chi-squared distribution for the degrees of
/// freedom `(k − 1)²`, `k = 2..=7`. The 25-dof, 1 % entry is the rounded
/// table value 44.3.
const CRITICAL_VALUES: [(u32, f64, f64); 6] = [
    // (dof, alpha = 0.01, alpha = 0.05)
    (1, 6.635, 3.841),
    (4, 13.277, 9.488),
    (9, 21.666, 16.919),
    (16, 32.000, 26.296),
    (25, 44.3, 37.652),
    (36, 58.619, 50.998),
];

pub fn critical_value(dof: u32, alpha: Alpha) -> Result<f64> {
    CRITICAL_VALUES
        .iter()
        .find(|(d, _, _)| *d == dof)
        .map(|&(_, one, five)| match alpha {
            Alpha::OnePercent => one,
            Alpha::FivePercent => five,
        })
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no critical value tabulated for {dof} degrees of freedom (supported: 2 to 7 states)"
            ))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovTestReport {
    pub chi_squared: f64,
    pub dof: u32,
    pub threshold: f64,
    pub alpha: Alpha,
    pub is_markov: bool,
    pub log_base: LogBase,
}

/// `χ² = 2 Σ_ij n_ij·|log(P_ij / P_0j)|` with `0·log(·) = 0`.
pub fn markov_property_test(
    tc: &TransitionCounts,
    marginals: &[f64],
    alpha: Alpha,
    log_base: LogBase,
) -> Result<MarkovTestReport> {
    let k = tc.k();
    if marginals.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: marginals.len(),
        });
    }
    let p = transition_probabilities(tc);
    let mut stat = 0.0;
    for (i, row) in tc.counts.iter().enumerate() {
        for (j, &n) in row.iter().enumerate() {
            if n == 0 {
                continue;
            }
            if !(marginals[j] > 0.0) {
                return Err(Error::Degenerate(format!(
                    "marginal probability of state {j} is zero but transitions into it were counted"
                )));
            }
            stat += n as f64 * log_base.log(p.probs[i][j] / marginals[j]).abs();
        }
    }
    let chi_squared = 2.0 * stat;
    let dof = ((k - 1) * (k - 1)) as u32;
    let threshold = critical_value(dof, alpha)?;
    Ok(MarkovTestReport {
        chi_squared,
        dof,
        threshold,
        alpha,
        is_markov: chi_squared > threshold,
        log_base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn table_matches_distribution() {
        for &(dof, one, five) in &CRITICAL_VALUES {
            let dist = ChiSquared::new(dof as f64).unwrap();
            let tol = if dof == 25 { 0.02 } else { 1e-3 };
            assert!((dist.inverse_cdf(0.99) - one).abs() < tol, "dof {dof}");
            assert!((dist.inverse_cdf(0.95) - five).abs() < 1e-3, "dof {dof}");
        }
        assert_eq!(critical_value(25, Alpha::OnePercent).unwrap(), 44.3);
        assert!(critical_value(49, Alpha::OnePercent).is_err());
    }

    #[test]
    fn two_state_hand_case() {
        let tc = TransitionCounts::from_matrix(vec![vec![2, 0], vec![0, 2]], 5).unwrap();
        let r = markov_property_test(&tc, &[0.5, 0.5], Alpha::OnePercent, LogBase::Natural)
            .unwrap();
        assert!((r.chi_squared - 8.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.dof, 1);
        assert_eq!(r.threshold, 6.635);
        assert!(!r.is_markov);
    }

    #[test]
    fn independent_chain_scores_zero() {
        let tc = TransitionCounts::from_matrix(vec![vec![1, 3], vec![2, 6]], 13).unwrap();
        let r = markov_property_test(&tc, &[0.25, 0.75], Alpha::FivePercent, LogBase::Base10)
            .unwrap();
        assert!(r.chi_squared.abs() < 1e-12);
    }

    #[test]
    fn zero_marginal_with_counts_is_degenerate() {
        let tc = TransitionCounts::from_matrix(vec![vec![1, 1], vec![1, 1]], 5).unwrap();
        assert!(matches!(
            markov_property_test(&tc, &[1.0, 0.0], Alpha::OnePercent, LogBase::Natural),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(Alpha::try_from(0.01).unwrap(), Alpha::OnePercent);
        assert_eq!(Alpha::try_from(0.05).unwrap(), Alpha::FivePercent);
        assert!(Alpha::try_from(0.1).is_err());
    }

    proptest! {
        #[test]
        fn invariant_under_relabeling(
            counts in prop::collection::vec(prop::collection::vec(1u64..30, 4), 4),
            perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
        ) {
            let total: u64 = counts.iter().flatten().sum::<u64>() + 1;
            let col: Vec<u64> = (0..4).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
            let marg: Vec<f64> = col.iter().map(|&c| c as f64 / total as f64).collect();
            let tc = TransitionCounts::from_matrix(counts.clone(), total).unwrap();
            let base = markov_property_test(&tc, &marg, Alpha::OnePercent, LogBase::Natural).unwrap();

            let relabeled: Vec<Vec<u64>> = (0..4)
                .map(|i| (0..4).map(|j| counts[perm[i]][perm[j]]).collect())
                .collect();
            let marg2: Vec<f64> = (0..4).map(|j| marg[perm[j]]).collect();
            let tc2 = TransitionCounts::from_matrix(relabeled, total).unwrap();
            let other = markov_property_test(&tc2, &marg2, Alpha::OnePercent, LogBase::Natural).unwrap();
            prop_assert!((base.chi_squared - other.chi_squared).abs() < 1e-9);
        }
    }
}
