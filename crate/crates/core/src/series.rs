//! Daily series representation, validation, standardization and differencing.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::FeatureError;

/// Seasonal cycle length used throughout: one year of daily values.
pub const DAYS_PER_YEAR: usize = 365;

/// Which hydrometeorological variable a series carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Temperature,
    Precipitation,
    Streamflow,
}

impl VariableKind {
    pub const ALL: [VariableKind; 3] = [
        VariableKind::Temperature,
        VariableKind::Precipitation,
        VariableKind::Streamflow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Temperature => "temperature",
            VariableKind::Precipitation => "precipitation",
            VariableKind::Streamflow => "streamflow",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "temperature" => Some(VariableKind::Temperature),
            "precipitation" => Some(VariableKind::Precipitation),
            "streamflow" => Some(VariableKind::Streamflow),
            _ => None,
        }
    }
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A regularly sampled daily series with a fixed seasonal period.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub start_date: NaiveDate,
    pub period: usize,
    pub kind: VariableKind,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, start_date: NaiveDate, period: usize, kind: VariableKind) -> Self {
        Self {
            values,
            start_date,
            period,
            kind,
        }
    }

    /// Convenience constructor for synthetic data: starts on 1980-01-01.
    pub fn from_values(values: Vec<f64>, period: usize, kind: VariableKind) -> Self {
        let start = NaiveDate::from_ymd_opt(1980, 1, 1).expect("valid date");
        Self::new(values, start, period, kind)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks completeness, finiteness and minimum length (two full cycles).
    pub fn validate(self) -> Result<Self, FeatureError> {
        if self.period == 0 {
            return Err(FeatureError::InvalidParameter("period must be positive".into()));
        }
        if let Some(i) = self.values.iter().position(|v| v.is_nan()) {
            return Err(FeatureError::MissingData { index: i });
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite { index: i });
        }
        let needed = 2 * self.period;
        if self.values.len() < needed {
            return Err(FeatureError::TooShort {
                len: self.values.len(),
                needed,
            });
        }
        Ok(self)
    }

    pub fn standardize(&self) -> Result<StandardizedSeries, FeatureError> {
        let values = standardize_values(&self.values)?;
        Ok(StandardizedSeries {
            values,
            period: self.period,
        })
    }
}

/// Values rescaled to sample mean 0 and sample standard deviation 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSeries {
    values: Vec<f64>,
    period: usize,
}

impl StandardizedSeries {
    /// Standardizes raw values with the given period.
    pub fn from_raw(values: &[f64], period: usize) -> Result<Self, FeatureError> {
        Ok(Self {
            values: standardize_values(values)?,
            period,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (divisor n - 1). Returns NaN for fewer than two values.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_sd(x: &[f64]) -> f64 {
    sample_variance(x).sqrt()
}

fn standardize_values(x: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if x.len() < 2 {
        return Err(FeatureError::TooShort {
            len: x.len(),
            needed: 2,
        });
    }
    let m = mean(x);
    let sd = sample_sd(x);
    // relative threshold: rounding noise on a constant series must not pass
    let scale = x.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    if !(sd > 1e-13 * scale) {
        return Err(FeatureError::ZeroVariance);
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}

/// Lag-one differencing applied `order` times.
pub fn difference(x: &[f64], order: usize) -> Result<Vec<f64>, FeatureError> {
    if x.len() <= order {
        return Err(FeatureError::TooShort {
            len: x.len(),
            needed: order + 1,
        });
    }
    let mut out = x.to_vec();
    for _ in 0..order {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Median with the mean of the two central order statistics for even n.
pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_values(values, 365, VariableKind::Streamflow)
    }

    #[test]
    fn validate_accepts_complete_series() {
        let s = ts((0..12_410).map(|i| (i as f64).sin()).collect());
        let out = s.clone().validate().unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn validate_rejects_nan_and_short() {
        let mut v: Vec<f64> = (0..800).map(|i| i as f64).collect();
        v[17] = f64::NAN;
        assert!(matches!(ts(v).validate(), Err(FeatureError::MissingData { index: 17 })));

        let mut v: Vec<f64> = (0..800).map(|i| i as f64).collect();
        v[3] = f64::INFINITY;
        assert!(matches!(ts(v).validate(), Err(FeatureError::NonFinite { index: 3 })));

        let v: Vec<f64> = (0..400).map(|i| i as f64).collect();
        assert!(matches!(
            ts(v).validate(),
            Err(FeatureError::TooShort { len: 400, needed: 730 })
        ));
    }

    #[test]
    fn standardize_examples() {
        let s = StandardizedSeries::from_raw(&[1.0, 3.0], 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.values()[0] + h).abs() < 1e-12);
        assert!((s.values()[1] - h).abs() < 1e-12);

        assert!(matches!(
            StandardizedSeries::from_raw(&[5.0, 5.0, 5.0], 1),
            Err(FeatureError::ZeroVariance)
        ));

        let s = StandardizedSeries::from_raw(&[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        let sd = (5.0_f64 / 3.0).sqrt();
        let expect = [-1.5 / sd, -0.5 / sd, 0.5 / sd, 1.5 / sd];
        for (a, b) in s.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((expect[0] + 1.1619).abs() < 1e-4);
    }

    #[test]
    fn difference_examples() {
        let x = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(difference(&x, 1).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(difference(&x, 2).unwrap(), vec![1.0, 1.0]);
        let ramp: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(difference(&ramp, 1).unwrap(), vec![1.0; 9]);
        assert!(matches!(difference(&[1.0, 2.0], 2), Err(FeatureError::TooShort { .. })));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    proptest! {
        #[test]
        fn standardized_moments(v in prop::collection::vec(-1e3f64..1e3, 3..200)) {
            prop_assume!(sample_sd(&v) > 1e-6);
            let s = StandardizedSeries::from_raw(&v, 1).unwrap();
            prop_assert!(mean(s.values()).abs() <= 1e-10);
            prop_assert!((sample_sd(s.values()) - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn standardize_idempotent_and_affine_invariant(
            v in prop::collection::vec(-100f64..100.0, 3..200),
            a in 0.01f64..100.0,
            b in -100f64..100.0,
        ) {
            prop_assume!(sample_sd(&v) > 1e-3);
            let s = StandardizedSeries::from_raw(&v, 1).unwrap();
            let again = StandardizedSeries::from_raw(s.values(), 1).unwrap();
            let mapped: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let t = StandardizedSeries::from_raw(&mapped, 1).unwrap();
            for i in 0..v.len() {
                prop_assert!((s.values()[i] - again.values()[i]).abs() <= 1e-10);
                prop_assert!((s.values()[i] - t.values()[i]).abs() <= 1e-10);
            }
        }

        #[test]
        fn difference_composes(v in prop::collection::vec(-1e3f64..1e3, 3..100)) {
            let d2 = difference(&v, 2).unwrap();
            let d11 = difference(&difference(&v, 1).unwrap(), 1).unwrap();
            prop_assert_eq!(d2.len(), v.len() - 2);
            prop_assert_eq!(d2, d11);
        }
    }
}
