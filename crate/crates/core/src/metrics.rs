//! Forecast accuracy statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MSE, MAE, MAPE (percent) and the Theil coefficient.
///
/// `mape` is `None` when an actual value is zero, `theil` when every
/// prediction is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mse: f64,
    pub mae: f64,
    pub mape: Option<f64>,
    pub theil: Option<f64>,
    pub n: usize,
}

/// Theil's coefficient here is `√(Σ(x − x̂)²/N) / √(Σx̂²/N)`: only the
/// predictions appear in the denominator, unlike the textbook U statistic
/// which also carries `Σx²`.
pub fn evaluate(actual: &[f64], predicted: &[f64]) -> Result<EvaluationReport> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = actual.len() as f64;
    let pairs = || actual.iter().zip(predicted);
    let sse: f64 = pairs().map(|(x, p)| (x - p).powi(2)).sum();
    let mae = pairs().map(|(x, p)| (x - p).abs()).sum::<f64>() / n;
    let mape = actual
        .iter()
        .all(|&x| x != 0.0)
        .then(|| 100.0 * pairs().map(|(x, p)| ((x - p) / x).abs()).sum::<f64>() / n);
    let pred_sq: f64 = predicted.iter().map(|p| p * p).sum();
    let theil = (pred_sq > 0.0).then(|| (sse / pred_sq).sqrt());
    Ok(EvaluationReport {
        mse: sse / n,
        mae,
        mape,
        theil,
        n: actual.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_point_case() {
        let r = evaluate(&[100.0, 200.0], &[110.0, 190.0]).unwrap();
        assert!((r.mse - 100.0).abs() < 1e-10);
        assert!((r.mae - 10.0).abs() < 1e-10);
        assert!((r.mape.unwrap() - 7.5).abs() < 1e-10);
        // √(mean sq. error / mean sq. prediction) = √(100 / 24100).
        assert!((r.theil.unwrap() - (100.0f64 / 24100.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn perfect_forecast() {
        let x = [3.0, 4.5, 1.0];
        let r = evaluate(&x, &x).unwrap();
        assert_eq!((r.mse, r.mae, r.mape, r.theil), (0.0, 0.0, Some(0.0), Some(0.0)));
    }

    #[test]
    fn degenerate_markers() {
        let r = evaluate(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.mape, None);
        assert!(r.theil.is_some());
        let r = evaluate(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(r.theil, None);
        assert!(evaluate(&[], &[]).is_err());
        assert!(evaluate(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn matches_single_pass_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let actual: Vec<f64> = (0..50).map(|_| rng.random_range(1.0..100.0)).collect();
        let predicted: Vec<f64> = actual.iter().map(|a| a + rng.random_range(-5.0..5.0)).collect();
        let (mut se, mut ae, mut pe, mut pp) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..50 {
            let d = actual[i] - predicted[i];
            se += d * d;
            ae += d.abs();
            pe += (d / actual[i]).abs();
            pp += predicted[i] * predicted[i];
        }
        let r = evaluate(&actual, &predicted).unwrap();
        assert!((r.mse - se / 50.0).abs() < 1e-10);
        assert!((r.mae - ae / 50.0).abs() < 1e-10);
        assert!((r.mape.unwrap() - pe * 2.0).abs() < 1e-10);
        assert!((r.theil.unwrap() - ((se / 50.0) / (pp / 50.0)).sqrt()).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn mae_bounded_by_rmse(
            a in prop::collection::vec(1.0f64..1e3, 1..30),
            d in prop::collection::vec(-50.0f64..50.0, 30),
        ) {
            let p: Vec<f64> = a.iter().zip(&d).map(|(x, e)| x + e).collect();
            let r = evaluate(&a, &p).unwrap();
            prop_assert!(r.mae <= r.mse.sqrt() + 1e-12 * r.mae.max(1.0));
        }

        #[test]
        fn scale_equivariance(
            a in prop::collection::vec(1.0f64..1e3, 1..30),
            d in prop::collection::vec(-50.0f64..50.0, 30),
            c in 0.01f64..100.0,
        ) {
            let p: Vec<f64> = a.iter().zip(&d).map(|(x, e)| x + e).collect();
            let base = evaluate(&a, &p).unwrap();
            let sa: Vec<f64> = a.iter().map(|x| c * x).collect();
            let sp: Vec<f64> = p.iter().map(|x| c * x).collect();
            let scaled = evaluate(&sa, &sp).unwrap();
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
            prop_assert!(close(scaled.mae, c * base.mae));
            prop_assert!(close(scaled.mse, c * c * base.mse));
            prop_assert!(close(scaled.mape.unwrap(), base.mape.unwrap()));
            prop_assert!(close(scaled.theil.unwrap(), base.theil.unwrap()));
        }

        #[test]
        fn theil_zero_iff_perfect(a in prop::collection::vec(1.0f64..1e3, 1..20), i in 0usize..20, e in 1e-6f64..1.0) {
            let mut p = a.clone();
            prop_assert_eq!(evaluate(&a, &p).unwrap().theil, Some(0.0));
            let i = i % a.len();
            p[i] += e;
            prop_assert!(evaluate(&a, &p).unwrap().theil.unwrap() > 0.0);
        }
    }
}
