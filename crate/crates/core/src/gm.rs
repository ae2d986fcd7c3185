//! GM(1,1): the single-variable first-order grey model.
//!
//! The whitened equation `dx¹/dt + a·x¹ = u` is estimated by least squares on
//! the background values `-½(x¹(k) + x¹(k+1))`, and the time response
//!
//! ```text
//! x̂¹(k+1) = (x⁰(1) − u/a)·e^{−ak} + u/a
//! ```
//!
//! is differenced back to the original scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{ago, TimeSeries};

/// Minimum number of observations for a GM(1,1) fit.
pub const MIN_FIT_LEN: usize = 4;

/// Below this magnitude the development coefficient is treated as zero.
const A_EPS: f64 = 1e-12;

/// Fitted GM(1,1) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmModel {
    /// Development coefficient.
    pub a: f64,
    /// Grey input.
    pub u: f64,
    /// First original observation, the anchor of the time response.
    pub x0_first: f64,
    pub n_fit: usize,
}

/// Estimate `(a, u)` from a strictly positive series of length ≥ 4.
pub fn fit_gm11(x: &[f64]) -> Result<GmModel> {
    if x.len() < MIN_FIT_LEN {
        return Err(Error::InsufficientData {
            required: MIN_FIT_LEN,
            actual: x.len(),
        });
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositive { index, value });
    }
    let x1 = ago(x)?;
    let x1 = x1.values();

    // Regress y = x⁰(k+1) on z = −½(x¹(k) + x¹(k+1)) with intercept:
    // y = a·z + u. Centred sums keep the 2×2 solve well conditioned.
    let z: Vec<f64> = x1.windows(2).map(|w| -0.5 * (w[0] + w[1])).collect();
    let y = &x[1..];
    let m = z.len() as f64;
    let z_mean = z.iter().sum::<f64>() / m;
    let y_mean = y.iter().sum::<f64>() / m;
    let (szz, szy) = z.iter().zip(y).fold((0.0, 0.0), |(szz, szy), (&zk, &yk)| {
        let dz = zk - z_mean;
        (szz + dz * dz, szy + dz * (yk - y_mean))
    });
    if szz == 0.0 || !szz.is_finite() {
        return Err(Error::Singular("background values have zero spread"));
    }
    let a = szy / szz;
    let u = y_mean - a * z_mean;
    if !(a.is_finite() && u.is_finite()) {
        return Err(Error::Singular("non-finite GM(1,1) parameters"));
    }
    Ok(GmModel {
        a,
        u,
        x0_first: x[0],
        n_fit: x.len(),
    })
}

impl GmModel {
    /// Time response `x̂¹(k+1)` for integer `k` (k = 0 gives `x⁰(1)`).
    ///
    /// Written as `x⁰(1)·e^{−ak} + u·(1 − e^{−ak})/a`, which tends to
    /// `x⁰(1) + u·k` as `a → 0` instead of cancelling `u/a` terms.
    pub fn accumulated(&self, k: i64) -> f64 {
        let k = k as f64;
        if self.a.abs() < A_EPS {
            self.x0_first + self.u * k
        } else {
            let decay = (-self.a * k).exp();
            self.x0_first * decay - self.u * (-self.a * k).exp_m1() / self.a
        }
    }

    /// Original-scale value at one-based position `k` (may lie outside the
    /// fitting range, including before it).
    pub fn value_at(&self, k: i64) -> f64 {
        if k == 1 {
            self.x0_first
        } else {
            self.accumulated(k - 1) - self.accumulated(k - 2)
        }
    }
}

/// Fitted values for positions `1..=n_fit` followed by `horizon` forecasts.
pub fn forecast_gm11(m: &GmModel, horizon: usize) -> Result<TimeSeries> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let total = m.n_fit + horizon;
    let mut out = Vec::with_capacity(total);
    let mut prev = m.accumulated(0);
    out.push(m.x0_first);
    for k in 1..total as i64 {
        let next = m.accumulated(k);
        out.push(next - prev);
        prev = next;
    }
    if let Some(step) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow { step: step + 1 });
    }
    TimeSeries::new(out)
}

/// Accuracy grade from the posterior test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grade {
    Good,
    Qualified,
    Just,
    Unqualified,
}

impl Grade {
    /// First matching row of the grading table, top-down. Inequalities are
    /// strict, so a value on a boundary falls through to the next grade.
    pub fn from_indices(p_small_error: f64, c_ratio: f64) -> Self {
        const ROWS: [(Grade, f64, f64); 3] = [
            (Grade::Good, 0.95, 0.35),
            (Grade::Qualified, 0.8, 0.5),
            (Grade::Just, 0.7, 0.65),
        ];
        ROWS.iter()
            .find(|(_, p_min, c_max)| p_small_error > *p_min && c_ratio < *c_max)
            .map(|(grade, _, _)| *grade)
            .unwrap_or(Grade::Unqualified)
    }
}

/// Posterior ratio, small-error probability and the resulting grade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub c_ratio: f64,
    pub p_small_error: f64,
    pub grade: Grade,
}

/// Threshold multiplier on the data standard deviation for "small" errors.
pub const SMALL_ERROR_FACTOR: f64 = 0.6745;

pub fn posterior_test(actual: &[f64], predicted: &[f64]) -> Result<PosteriorReport> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if actual.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: actual.len(),
        });
    }
    let s1 = sample_std(actual);
    if s1 == 0.0 {
        return Err(Error::Degenerate(
            "actual series is constant; posterior ratio undefined".into(),
        ));
    }
    let q: Vec<f64> = actual.iter().zip(predicted).map(|(x, p)| x - p).collect();
    let q_mean = q.iter().sum::<f64>() / q.len() as f64;
    let s2 = sample_std(&q);
    let limit = SMALL_ERROR_FACTOR * s1;
    let small = q.iter().filter(|&&e| (e - q_mean).abs() <= limit).count();
    let c_ratio = s2 / s1;
    let p_small_error = small as f64 / q.len() as f64;
    Ok(PosteriorReport {
        c_ratio,
        p_small_error,
        grade: Grade::from_indices(p_small_error, c_ratio),
    })
}

/// Standard deviation with divisor `n − 1`.
fn sample_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Normal equations `BᵀB·[a,u]ᵀ = Bᵀy` assembled entry by entry and solved
    /// by Gaussian elimination with partial pivoting.
    fn normal_equation_oracle(x: &[f64]) -> (f64, f64) {
        let mut x1 = vec![x[0]];
        for v in &x[1..] {
            let last = *x1.last().unwrap();
            x1.push(last + v);
        }
        let mut btb = [[0.0f64; 2]; 2];
        let mut bty = [0.0f64; 2];
        for k in 0..x.len() - 1 {
            let row = [-0.5 * (x1[k] + x1[k + 1]), 1.0];
            for i in 0..2 {
                for j in 0..2 {
                    btb[i][j] += row[i] * row[j];
                }
                bty[i] += row[i] * x[k + 1];
            }
        }
        let mut m = [
            [btb[0][0], btb[0][1], bty[0]],
            [btb[1][0], btb[1][1], bty[1]],
        ];
        if m[1][0].abs() > m[0][0].abs() {
            m.swap(0, 1);
        }
        let f = m[1][0] / m[0][0];
        for c in 0..3 {
            m[1][c] -= f * m[0][c];
        }
        let u = m[1][2] / m[1][1];
        let a = (m[0][2] - m[0][1] * u) / m[0][0];
        (a, u)
    }

    fn exponential_fixture() -> Vec<f64> {
        (1..=8).map(|k| 5.0 * (-0.1 * (k as f64 - 1.0)).exp()).collect()
    }

    #[test]
    fn constant_series_gives_zero_development() {
        let m = fit_gm11(&[10.0; 4]).unwrap();
        assert!(m.a.abs() < 1e-9, "a = {}", m.a);
        assert!((m.u - 10.0).abs() < 1e-9, "u = {}", m.u);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert_eq!(
            fit_gm11(&[1.0, 2.0]),
            Err(Error::InsufficientData { required: 4, actual: 2 })
        );
        assert_eq!(
            fit_gm11(&[1.0, 2.0, 0.0, 3.0]),
            Err(Error::NonPositive { index: 2, value: 0.0 })
        );
    }

    #[test]
    fn exponential_fit_matches_normal_equations() {
        let x = exponential_fixture();
        let m = fit_gm11(&x).unwrap();
        let (a, u) = normal_equation_oracle(&x);
        assert!((m.a - a).abs() < 1e-9, "{} vs {}", m.a, a);
        assert!((m.u - u).abs() < 1e-9, "{} vs {}", m.u, u);
    }

    #[test]
    fn exponential_fit_has_closed_form_bias() {
        // Sampling the continuous response exactly, the trapezoidal background
        // value turns a into 2·tanh(a/2) and u into that times u/a.
        let (a, u, x0) = (0.1, 0.7, 5.0);
        let truth = GmModel { a, u, x0_first: x0, n_fit: 12 };
        let x: Vec<f64> = (1..=12).map(|k| truth.value_at(k)).collect();
        let m = fit_gm11(&x).unwrap();
        let a_disc = 2.0 * (a / 2.0).tanh();
        assert!((m.a - a_disc).abs() < 1e-12);
        assert!((m.u - a_disc * u / a).abs() < 1e-12);
    }

    #[test]
    fn constant_model_forecast() {
        let m = GmModel { a: 0.0, u: 10.0, x0_first: 10.0, n_fit: 4 };
        let f = forecast_gm11(&m, 3).unwrap();
        assert_eq!(f.len(), 7);
        assert!(f.values().iter().all(|&v| (v - 10.0).abs() < 1e-12));
        assert_eq!(forecast_gm11(&m, 0), Err(Error::InvalidHorizon));
    }

    #[test]
    fn forecast_matches_term_by_term_response() {
        let m = fit_gm11(&exponential_fixture()).unwrap();
        let f = forecast_gm11(&m, 4).unwrap();
        let response = |k: f64| (m.x0_first - m.u / m.a) * (-m.a * k).exp() + m.u / m.a;
        assert_eq!(f.values()[0], m.x0_first);
        for k in 1..f.len() {
            let expected = response(k as f64) - response(k as f64 - 1.0);
            assert!((f.values()[k] - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn accumulated_response_has_constant_ratio() {
        let m = fit_gm11(&exponential_fixture()).unwrap();
        let shift = m.u / m.a;
        for k in 0..10 {
            let ratio = (m.accumulated(k + 1) - shift) / (m.accumulated(k) - shift);
            assert!((ratio - (-m.a).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn grading_table_rows() {
        assert_eq!(Grade::from_indices(0.9, 0.4), Grade::Qualified);
        assert_eq!(Grade::from_indices(0.6, 0.7), Grade::Unqualified);
        assert_eq!(Grade::from_indices(0.99, 0.1), Grade::Good);
        assert_eq!(Grade::from_indices(0.75, 0.6), Grade::Just);
        // Boundaries are strict.
        assert_eq!(Grade::from_indices(0.95, 0.1), Grade::Qualified);
        assert_eq!(Grade::from_indices(0.99, 0.35), Grade::Qualified);
        assert_eq!(Grade::from_indices(0.7, 0.1), Grade::Unqualified);
    }

    #[test]
    fn posterior_perfect_fit() {
        let x = [1.0, 3.0, 2.0, 5.0];
        let r = posterior_test(&x, &x).unwrap();
        assert_eq!(r.c_ratio, 0.0);
        assert_eq!(r.p_small_error, 1.0);
        assert_eq!(r.grade, Grade::Good);
    }

    #[test]
    fn posterior_rejects_constant_actual() {
        assert!(matches!(
            posterior_test(&[2.0; 3], &[1.0, 2.0, 3.0]),
            Err(Error::Degenerate(_))
        ));
    }

    fn brute_grade(p: f64, c: f64) -> Grade {
        if p > 0.95 && c < 0.35 {
            Grade::Good
        } else if p > 0.8 && c < 0.5 {
            Grade::Qualified
        } else if p > 0.7 && c < 0.65 {
            Grade::Just
        } else {
            Grade::Unqualified
        }
    }

    proptest! {
        #[test]
        fn recovers_discrete_response_parameters(
            a in -0.3f64..0.3, u in 1.0f64..50.0, x0 in 1.0f64..100.0,
        ) {
            prop_assume!(a.abs() > 1e-3);
            // Data that satisfy the grey difference equation exactly are
            // geometric in x¹ with ratio (1 − a/2)/(1 + a/2).
            let r = (1.0 - a / 2.0) / (1.0 + a / 2.0);
            let fixed = u / a;
            let x1: Vec<f64> = (0..10).map(|k| fixed + (x0 - fixed) * r.powi(k)).collect();
            let mut x = vec![x1[0]];
            x.extend(x1.windows(2).map(|w| w[1] - w[0]));
            prop_assume!(x.iter().all(|v| *v > 0.0));
            let m = fit_gm11(&x).unwrap();
            prop_assert!(((m.a - a) / a).abs() < 1e-6);
            prop_assert!(((m.u - u) / u).abs() < 1e-6);
        }

        #[test]
        fn grade_matches_brute_force(p in 0.0f64..1.0, c in 0.0f64..1.5) {
            prop_assert_eq!(Grade::from_indices(p, c), brute_grade(p, c));
        }

        #[test]
        fn posterior_grade_consistent(
            x in prop::collection::vec(50.0f64..150.0, 4..40),
            noise in prop::collection::vec(-5.0f64..5.0, 40),
        ) {
            let pred: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| a + e).collect();
            if let Ok(r) = posterior_test(&x, &pred) {
                prop_assert_eq!(r.grade, brute_grade(r.p_small_error, r.c_ratio));
                prop_assert!((0.0..=1.0).contains(&r.p_small_error));
            }
        }
    }
}
