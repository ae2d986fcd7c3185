//! Residual states and Markov chains over them.
//!
//! Relative residuals of a grey fit are split into `k` interval states. The
//! crisp path counts one-step transitions between states and tests whether
//! the chain carries information beyond the marginal distribution; the fuzzy
//! path replaces crisp membership with a triangular partition of unity and
//! uses the resulting transition matrix to correct the grey forecast.
//!
//! State indices are zero-based throughout: state `0` is the lowest interval.

mod chi_squared;
mod fuzzy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chi_squared::{critical_value, markov_property_test, Alpha, LogBase, MarkovTestReport};
pub use fuzzy::{fmarkov_correct, fuzzy_memberships, fuzzy_transition_matrix, FuzzyMarkovModel};

/// Boundaries `m_0 < m_1 < … < m_k` of `k` residual states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StatePartition {
    boundaries: Vec<f64>,
}

/// Six states: losses of 2.5–9 %, 1–2.5 %, 0–1 %, gains of 0–1 %,
/// 1–2.5 % and 2.5–9 % relative to the previous observation.
pub const DEFAULT_BOUNDARIES: [f64; 7] = [-0.09, -0.025, -0.01, 0.0, 0.01, 0.025, 0.09];

impl StatePartition {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "a partition needs at least 2 states (3 boundaries), got {} boundaries",
                boundaries.len()
            )));
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("boundaries must be finite".into()));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "boundaries must be strictly increasing".into(),
            ));
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Number of states.
    pub fn k(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Interval midpoints `½(m_{j−1} + m_j)`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.boundaries
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// State of a single residual: `[m_{i−1}, m_i)`, last interval closed.
    /// Values outside `[m_0, m_k]` clamp to the extreme states.
    pub fn state_of(&self, z: f64) -> usize {
        let k = self.k();
        // Number of interior boundaries at or below z.
        let interior = &self.boundaries[1..k];
        interior.partition_point(|&b| b <= z)
    }
}

impl Default for StatePartition {
    fn default() -> Self {
        Self {
            boundaries: DEFAULT_BOUNDARIES.to_vec(),
        }
    }
}

impl TryFrom<Vec<f64>> for StatePartition {
    type Error = Error;

    fn try_from(boundaries: Vec<f64>) -> Result<Self> {
        Self::new(boundaries)
    }
}

impl From<StatePartition> for Vec<f64> {
    fn from(p: StatePartition) -> Self {
        p.boundaries
    }
}

/// State sequence plus how many residuals fell outside the partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub states: Vec<usize>,
    pub clamped_below: usize,
    pub clamped_above: usize,
}

pub fn classify_states(z: &[f64], p: &StatePartition) -> Result<Classification> {
    if let Some(index) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let lo = p.boundaries[0];
    let hi = p.boundaries[p.k()];
    Ok(Classification {
        states: z.iter().map(|&v| p.state_of(v)).collect(),
        clamped_below: z.iter().filter(|&&v| v < lo).count(),
        clamped_above: z.iter().filter(|&&v| v > hi).count(),
    })
}

/// One-step transition counts `n_ij`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub counts: Vec<Vec<u64>>,
    /// `Σ_j n_ij`: occupancy of state `i` over all points but the last.
    pub row_totals: Vec<u64>,
    /// Length of the state sequence the counts came from.
    pub total: u64,
}

impl TransitionCounts {
    /// Wrap an externally computed count matrix.
    pub fn from_matrix(counts: Vec<Vec<u64>>, total: u64) -> Result<Self> {
        let k = counts.len();
        if k < 2 {
            return Err(Error::InvalidParameter("need at least 2 states".into()));
        }
        if let Some(row) = counts.iter().find(|r| r.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "count matrix is not square: row of length {} in a {k}-state matrix",
                row.len()
            )));
        }
        let row_totals = counts.iter().map(|r| r.iter().sum()).collect();
        Ok(Self {
            counts,
            row_totals,
            total,
        })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }
}

pub fn count_transitions(states: &[usize], k: usize) -> Result<TransitionCounts> {
    if states.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: states.len(),
        });
    }
    if let Some(&s) = states.iter().find(|&&s| s >= k) {
        return Err(Error::InvalidParameter(format!(
            "state {s} out of range for {k} states"
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for w in states.windows(2) {
        counts[w[0]][w[1]] += 1;
    }
    TransitionCounts::from_matrix(counts, states.len() as u64)
}

/// Number of points in each state over the whole sequence.
pub fn occupancy(states: &[usize], k: usize) -> Vec<u64> {
    let mut out = vec![0u64; k];
    for &s in states {
        if s < k {
            out[s] += 1;
        }
    }
    out
}

/// Row-stochastic matrix with the indices of rows that had no mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub probs: Vec<Vec<f64>>,
    #[serde(default)]
    pub degenerate_rows: Vec<usize>,
}

/// `P_ij = n_ij / n_i`; empty rows become uniform and are flagged.
pub fn transition_probabilities(tc: &TransitionCounts) -> TransitionMatrix {
    let k = tc.k();
    let mut degenerate_rows = Vec::new();
    let probs = tc
        .counts
        .iter()
        .zip(&tc.row_totals)
        .enumerate()
        .map(|(i, (row, &n_i))| {
            if n_i == 0 {
                degenerate_rows.push(i);
                vec![1.0 / k as f64; k]
            } else {
                row.iter().map(|&n| n as f64 / n_i as f64).collect()
            }
        })
        .collect();
    TransitionMatrix {
        probs,
        degenerate_rows,
    }
}

/// `M_0j = n_j / N` over the full state sequence.
pub fn marginal_distribution(occupancy: &[u64], total: u64) -> Result<Vec<f64>> {
    if total == 0 {
        return Err(Error::Degenerate("total count is zero".into()));
    }
    let sum: u64 = occupancy.iter().sum();
    if sum > total {
        return Err(Error::InvalidParameter(format!(
            "occupancy sums to {sum}, more than the total {total}"
        )));
    }
    Ok(occupancy
        .iter()
        .map(|&n| n as f64 / total as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_partition() {
        let p = StatePartition::default();
        assert_eq!(p.k(), 6);
        let mids = p.midpoints();
        assert!((mids[2] + 0.005).abs() < 1e-15);
        assert!((mids[4] - 0.0175).abs() < 1e-15);
    }

    #[test]
    fn partition_validation() {
        assert!(StatePartition::new(vec![0.0, 1.0]).is_err());
        assert!(StatePartition::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(StatePartition::new(vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(StatePartition::new(vec![-1.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn classify_examples() {
        let p = StatePartition::default();
        let c = classify_states(&[-0.05, 0.005, 0.30], &p).unwrap();
        assert_eq!(c.states, vec![0, 3, 5]);
        assert_eq!(c.clamped_above, 1);
        assert_eq!(c.clamped_below, 0);
    }

    #[test]
    fn classify_ties_and_edges() {
        let p = StatePartition::default();
        let c = classify_states(&[-0.09, -0.025, 0.0, 0.09, -0.5], &p).unwrap();
        assert_eq!(c.states, vec![0, 1, 3, 5, 0]);
        assert_eq!(c.clamped_below, 1);
        assert_eq!(c.clamped_above, 0);
        assert!(classify_states(&[f64::INFINITY], &p).is_err());
    }

    #[test]
    fn count_examples() {
        let tc = count_transitions(&[0, 0, 1, 0], 2).unwrap();
        assert_eq!(tc.counts, vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(tc.row_totals, vec![2, 1]);
        assert_eq!(tc.total, 4);

        let tc = count_transitions(&[1, 1, 1], 2).unwrap();
        assert_eq!(tc.counts, vec![vec![0, 0], vec![0, 2]]);

        let tc = count_transitions(&[0, 1, 2, 0], 3).unwrap();
        assert_eq!(tc.counts[0][1], 1);
        assert_eq!(tc.counts[1][2], 1);
        assert_eq!(tc.counts[2][0], 1);
        assert_eq!(tc.counts.iter().flatten().sum::<u64>(), 3);

        assert!(matches!(
            count_transitions(&[0], 2),
            Err(Error::InsufficientData { .. })
        ));
        assert!(count_transitions(&[0, 3], 2).is_err());
    }

    #[test]
    fn probability_examples() {
        let tc = TransitionCounts::from_matrix(vec![vec![5, 5], vec![0, 0]], 11).unwrap();
        let p = transition_probabilities(&tc);
        assert_eq!(p.probs[0], vec![0.5, 0.5]);
        assert_eq!(p.probs[1], vec![0.5, 0.5]);
        assert_eq!(p.degenerate_rows, vec![1]);

        let tc = TransitionCounts::from_matrix(vec![vec![0; 3]; 3], 1).unwrap();
        let p = transition_probabilities(&tc);
        assert!(p.probs[0].iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(p.degenerate_rows, vec![0, 1, 2]);
    }

    #[test]
    fn reference_first_row() {
        let tc = TransitionCounts::from_matrix(
            vec![
                vec![53, 14, 3, 0, 2, 1],
                vec![0; 6],
                vec![0; 6],
                vec![0; 6],
                vec![0; 6],
                vec![0; 6],
            ],
            278,
        )
        .unwrap();
        let row = &transition_probabilities(&tc).probs[0];
        let want = [0.7260, 0.1918, 0.0411, 0.0, 0.0274, 0.0137];
        for (got, want) in row.iter().zip(want) {
            assert!((got - want).abs() < 5e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn marginal_examples() {
        let m = marginal_distribution(&[73, 42, 29, 19, 44, 71], 278).unwrap();
        let want = [0.2626, 0.1511, 0.1043, 0.0683, 0.1583, 0.2554];
        for (got, want) in m.iter().zip(want) {
            assert!((got - want).abs() < 5e-5);
        }
        assert_eq!(marginal_distribution(&[1, 1], 2).unwrap(), vec![0.5, 0.5]);
        assert_eq!(marginal_distribution(&[0, 4], 4).unwrap(), vec![0.0, 1.0]);
        assert!(marginal_distribution(&[1], 0).is_err());
        assert!(marginal_distribution(&[3, 3], 5).is_err());
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(rows in prop::collection::vec(prop::collection::vec(0u64..50, 4), 4)) {
            let tc = TransitionCounts::from_matrix(rows, 100).unwrap();
            let p = transition_probabilities(&tc);
            for row in &p.probs {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn classification_respects_intervals(z in -0.2f64..0.2) {
            let p = StatePartition::default();
            let s = p.state_of(z);
            let b = p.boundaries();
            if z >= b[0] && z <= b[p.k()] {
                prop_assert!(b[s] <= z);
                prop_assert!(z < b[s + 1] || (s == p.k() - 1 && z <= b[s + 1]));
            }
        }
    }
}
