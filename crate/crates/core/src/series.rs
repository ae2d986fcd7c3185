//! Sequence operators shared by every model: accumulated generation (AGO),
//! its inverse, relative residuals and sliding-window samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of lagged inputs fed to a network.
pub const DEFAULT_WINDOW: usize = 4;

/// An ordered sequence of finite observations with optional date labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_values(&values)?;
        Ok(Self { values, labels: None })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        validate_values(&values)?;
        if labels.len() != values.len() {
            return Err(Error::LabelLengthMismatch {
                values: values.len(),
                labels: labels.len(),
            });
        }
        Ok(Self {
            values,
            labels: Some(labels),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The first `n` observations, labels included.
    pub fn head(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        if n == 0 {
            return Err(Error::EmptySeries);
        }
        Ok(Self {
            values: self.values[..n].to_vec(),
            labels: self.labels.as_ref().map(|l| l[..n].to_vec()),
        })
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for TimeSeries {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

fn validate_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Running sums of a source series. `values()[0]` equals the first source value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgoSeries(Vec<f64>);

impl AgoSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_values(&values)?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Accumulated generating operation: `out[k] = x[0] + ... + x[k]`.
pub fn ago(x: &[f64]) -> Result<AgoSeries> {
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let out = x
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(AgoSeries(out))
}

/// Inverse AGO (first differences, first element kept).
pub fn iago(x1: &AgoSeries) -> Result<TimeSeries> {
    TimeSeries::new(first_differences(x1.values())?)
}

pub(crate) fn first_differences(x1: &[f64]) -> Result<Vec<f64>> {
    let Some(&first) = x1.first() else {
        return Err(Error::EmptySeries);
    };
    let mut out = Vec::with_capacity(x1.len());
    out.push(first);
    out.extend(x1.windows(2).map(|w| w[1] - w[0]));
    Ok(out)
}

/// Relative residuals `Z_t = (Y_t - X̂_t) / Y_{t-1}`.
///
/// Defined from the second observation onward; `offset` records the
/// zero-based index in the source series of `values[0]` (always 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub offset: usize,
    pub values: Vec<f64>,
}

impl Residuals {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Residual at zero-based source index `t`, if defined.
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.offset)
            .and_then(|i| self.values.get(i))
            .copied()
    }
}

pub fn relative_residuals(actual: &[f64], fitted: &[f64]) -> Result<Residuals> {
    if actual.len() != fitted.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: fitted.len(),
        });
    }
    if actual.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: actual.len(),
        });
    }
    let values = (1..actual.len())
        .map(|t| {
            let prev = actual[t - 1];
            if prev == 0.0 {
                Err(Error::ZeroDenominator { index: t - 1 })
            } else {
                Ok((actual[t] - fitted[t]) / prev)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Residuals { offset: 1, values })
}

/// One supervised sample built from a sliding window.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub inputs: Vec<f64>,
    pub target: f64,
}

/// Sliding windows of `window` inputs with the next value as target.
pub fn make_windows(x: &[f64], window: usize) -> Result<Vec<Sample>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be positive".into()));
    }
    if x.len() < window + 1 {
        return Err(Error::InsufficientData {
            required: window + 1,
            actual: x.len(),
        });
    }
    Ok(x.windows(window + 1)
        .map(|w| Sample {
            inputs: w[..window].to_vec(),
            target: w[window],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ago_examples() {
        assert_eq!(ago(&[1.0, 2.0, 3.0]).unwrap().values(), &[1.0, 3.0, 6.0]);
        assert_eq!(
            ago(&[5.0, 5.0, 5.0, 5.0]).unwrap().values(),
            &[5.0, 10.0, 15.0, 20.0]
        );
        assert_eq!(
            ago(&[1.0, -1.0, 1.0, -1.0]).unwrap().values(),
            &[1.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(ago(&[]), Err(Error::EmptySeries));
    }

    #[test]
    fn iago_examples() {
        let x1 = AgoSeries::new(vec![1.0, 3.0, 6.0]).unwrap();
        assert_eq!(iago(&x1).unwrap().values(), &[1.0, 2.0, 3.0]);
        let x1 = AgoSeries::new(vec![5.0, 10.0, 15.0, 20.0]).unwrap();
        assert_eq!(iago(&x1).unwrap().values(), &[5.0; 4]);
        let x1 = AgoSeries::new(vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(iago(&x1).unwrap().values(), &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(AgoSeries::new(vec![]), Err(Error::EmptySeries));
        assert_eq!(first_differences(&[]), Err(Error::EmptySeries));
    }

    #[test]
    fn series_validation() {
        assert_eq!(TimeSeries::new(vec![]), Err(Error::EmptySeries));
        assert_eq!(
            TimeSeries::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(matches!(
            TimeSeries::with_labels(vec![1.0, 2.0], vec!["a".into()]),
            Err(Error::LabelLengthMismatch { values: 2, labels: 1 })
        ));
    }

    #[test]
    fn residual_examples() {
        let z = relative_residuals(&[100.0, 110.0, 105.0], &[100.0, 108.0, 106.0]).unwrap();
        assert_eq!(z.offset, 1);
        assert!((z.values[0] - 0.02).abs() < 1e-15);
        assert!((z.values[1] + 1.0 / 110.0).abs() < 1e-15);
        assert_eq!(z.at(2), Some(z.values[1]));
        assert_eq!(z.at(0), None);

        let same = relative_residuals(&[3.0, 4.0, 5.0], &[3.0, 4.0, 5.0]).unwrap();
        assert!(same.values.iter().all(|&v| v == 0.0));

        let z = relative_residuals(&[100.0, 100.0], &[100.0, 90.0]).unwrap();
        assert!((z.values[0] - 0.10).abs() < 1e-15);
    }

    #[test]
    fn residual_zero_denominator_names_index() {
        let err = relative_residuals(&[1.0, 0.0, 2.0], &[1.0, 0.0, 2.0]).unwrap_err();
        assert_eq!(err, Error::ZeroDenominator { index: 1 });
    }

    #[test]
    fn window_examples() {
        let s = make_windows(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 4).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].inputs, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s[0].target, 5.0);
        assert_eq!(s[1].inputs, vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(s[1].target, 6.0);

        let s = make_windows(&[1.0, 2.0], 1).unwrap();
        assert_eq!(s, vec![Sample { inputs: vec![1.0], target: 2.0 }]);

        assert_eq!(
            make_windows(&[1.0, 2.0, 3.0], 4),
            Err(Error::InsufficientData { required: 5, actual: 3 })
        );
    }

    proptest! {
        #[test]
        fn iago_inverts_ago(x in prop::collection::vec(-1e6f64..1e6, 1..64)) {
            // Round trip is exact only when partial sums are representable; use
            // integer-valued data so every sum is exact in f64.
            let x: Vec<f64> = x.iter().map(|v| v.round()).collect();
            let back = iago(&ago(&x).unwrap()).unwrap();
            prop_assert_eq!(back.values(), &x[..]);
        }

        #[test]
        fn ago_is_linear(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..64),
            alpha in -10.0f64..10.0,
            beta in -10.0f64..10.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            let lhs = ago(&mix).unwrap();
            let ax = ago(&x).unwrap();
            let ay = ago(&y).unwrap();
            for k in 0..x.len() {
                let rhs = alpha * ax.values()[k] + beta * ay.values()[k];
                let scale = 1.0 + alpha.abs() * ax.values()[..=k].iter().map(|v| v.abs()).fold(0.0, f64::max)
                    + beta.abs() * ay.values()[..=k].iter().map(|v| v.abs()).fold(0.0, f64::max);
                prop_assert!((lhs.values()[k] - rhs).abs() <= 1e-12 * scale * (k as f64 + 1.0));
            }
        }

        #[test]
        fn window_count(n in 2usize..50, w in 1usize..10) {
            prop_assume!(n > w);
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            prop_assert_eq!(make_windows(&x, w).unwrap().len(), n - w);
        }
    }
}
