//! Autocorrelation, partial autocorrelation and spectral entropy features.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::FeatureError;
use crate::series::{difference, mean, StandardizedSeries};

/// Sample autocorrelations at lags `1..=max_lag` (biased, divide-by-n estimator).
#[derive(Debug, Clone, PartialEq)]
pub struct AcfVector {
    r: Vec<f64>,
    n: usize,
}

impl AcfVector {
    /// Autocorrelation at `lag` (1-based). Lag 0 is 1 by definition.
    pub fn at(&self, lag: usize) -> f64 {
        if lag == 0 {
            1.0
        } else {
            self.r[lag - 1]
        }
    }

    pub fn max_lag(&self) -> usize {
        self.r.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    /// Sum of squared autocorrelations over lags `1..=lags`.
    pub fn sum_sq(&self, lags: usize) -> f64 {
        self.r[..lags].iter().map(|v| v * v).sum()
    }

    /// First lag whose autocorrelation is at or below zero; the horizon if none is.
    pub fn first_zero_crossing(&self) -> usize {
        self.r
            .iter()
            .position(|&v| v <= 0.0)
            .map_or(self.r.len(), |i| i + 1)
    }
}

/// Partial autocorrelations at lags `1..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacfVector {
    phi: Vec<f64>,
}

impl PacfVector {
    pub fn at(&self, lag: usize) -> f64 {
        self.phi[lag - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phi
    }

    pub fn sum_sq(&self, lags: usize) -> f64 {
        self.phi[..lags].iter().map(|v| v * v).sum()
    }
}

pub fn acf(x: &[f64], max_lag: usize) -> Result<AcfVector, FeatureError> {
    let n = x.len();
    if max_lag == 0 {
        return Err(FeatureError::InvalidParameter("max_lag must be positive".into()));
    }
    if max_lag >= n {
        return Err(FeatureError::LagTooLarge { lag: max_lag, len: n });
    }
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = d.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    let r = (1..=max_lag)
        .map(|k| d[..n - k].iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect();
    Ok(AcfVector { r, n })
}

/// Durbin-Levinson recursion on an autocorrelation sequence.
pub fn pacf_from_acf(r: &AcfVector, max_lag: usize) -> Result<PacfVector, FeatureError> {
    if max_lag > r.max_lag() {
        return Err(FeatureError::LagTooLarge {
            lag: max_lag,
            len: r.series_len(),
        });
    }
    let mut phi = Vec::with_capacity(max_lag);
    let mut prev: Vec<f64> = Vec::with_capacity(max_lag);
    let mut cur: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let (num, den) = if k == 1 {
            (r.at(1), 1.0)
        } else {
            let mut num = r.at(k);
            let mut den = 1.0;
            for j in 1..k {
                num -= prev[j - 1] * r.at(k - j);
                den -= prev[j - 1] * r.at(j);
            }
            (num, den)
        };
        if den.abs() < 1e-12 {
            return Err(FeatureError::NumericalSingularity { lag: k });
        }
        let phi_kk = num / den;
        cur.clear();
        for j in 1..k {
            cur.push(prev[j - 1] - phi_kk * prev[k - j - 1]);
        }
        cur.push(phi_kk);
        std::mem::swap(&mut prev, &mut cur);
        phi.push(phi_kk);
    }
    Ok(PacfVector { phi })
}

pub fn pacf(x: &[f64], max_lag: usize) -> Result<PacfVector, FeatureError> {
    pacf_from_acf(&acf(x, max_lag)?, max_lag)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfFeatures {
    pub x_acf1: f64,
    pub x_acf10: f64,
    pub diff1_acf1: f64,
    pub diff1_acf10: f64,
    pub diff2_acf1: f64,
    pub diff2_acf10: f64,
    pub seas_acf1: f64,
    pub firstzero_ac: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacfFeatures {
    pub x_pacf5: f64,
    pub diff1x_pacf5: f64,
    pub diff2x_pacf5: f64,
    pub seas_pacf: f64,
}

/// Default cap on the lag scanned for the first zero crossing.
pub const FIRSTZERO_MAX_LAG: usize = 730;

fn check_seasonal_len(x: &StandardizedSeries) -> Result<(), FeatureError> {
    let needed = 2 * x.period() + 2;
    if x.len() < needed {
        return Err(FeatureError::TooShort { len: x.len(), needed });
    }
    Ok(())
}

pub fn acf_feature_set(
    x: &StandardizedSeries,
    firstzero_max_lag: usize,
) -> Result<AcfFeatures, FeatureError> {
    check_seasonal_len(x)?;
    let n = x.len();
    let horizon = firstzero_max_lag.min(n - 1).max(1);
    let r = acf(x.values(), horizon.max(x.period()).max(10))?;
    let d1 = difference(x.values(), 1)?;
    let d2 = difference(x.values(), 2)?;
    let r1 = acf(&d1, 10)?;
    let r2 = acf(&d2, 10)?;
    let firstzero_ac = r.as_slice()[..horizon]
        .iter()
        .position(|&v| v <= 0.0)
        .map_or(horizon, |i| i + 1);
    Ok(AcfFeatures {
        x_acf1: r.at(1),
        x_acf10: r.sum_sq(10),
        diff1_acf1: r1.at(1),
        diff1_acf10: r1.sum_sq(10),
        diff2_acf1: r2.at(1),
        diff2_acf10: r2.sum_sq(10),
        seas_acf1: r.at(x.period()),
        firstzero_ac,
    })
}

pub fn pacf_feature_set(x: &StandardizedSeries) -> Result<PacfFeatures, FeatureError> {
    check_seasonal_len(x)?;
    let lags = x.period().max(5);
    let p = pacf(x.values(), lags)?;
    let p1 = pacf(&difference(x.values(), 1)?, 5)?;
    let p2 = pacf(&difference(x.values(), 2)?, 5)?;
    Ok(PacfFeatures {
        x_pacf5: p.sum_sq(5),
        diff1x_pacf5: p1.sum_sq(5),
        diff2x_pacf5: p2.sum_sq(5),
        seas_pacf: p.at(x.period()),
    })
}

/// Raw periodogram ordinates |X_j|^2 / n for j = 0..n-1 of the mean-removed series.
pub fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr() / n as f64).collect()
}

/// Weights of the convolution of modified Daniell kernels with the given (odd) spans.
pub fn modified_daniell(spans: &[usize]) -> Result<Vec<f64>, FeatureError> {
    let mut kernel = vec![1.0];
    for &span in spans {
        if span % 2 == 0 {
            return Err(FeatureError::InvalidParameter(format!(
                "smoothing span {span} must be odd"
            )));
        }
        if span == 1 {
            continue;
        }
        let m = (span - 1) / 2;
        let mut k = vec![1.0 / (2 * m) as f64; span];
        k[0] = 1.0 / (4 * m) as f64;
        k[span - 1] = k[0];
        let mut out = vec![0.0; kernel.len() + span - 1];
        for (i, a) in kernel.iter().enumerate() {
            for (j, b) in k.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        kernel = out;
    }
    Ok(kernel)
}

/// Normalized Shannon entropy of the (optionally smoothed) periodogram over (0, pi].
pub fn spectral_entropy(x: &StandardizedSeries, spans: &[usize]) -> Result<f64, FeatureError> {
    spectral_entropy_values(x.values(), spans)
}

pub fn spectral_entropy_values(x: &[f64], spans: &[usize]) -> Result<f64, FeatureError> {
    let n = x.len();
    if n < 16 {
        return Err(FeatureError::TooShort { len: n, needed: 16 });
    }
    let raw = periodogram(x);
    let kernel = modified_daniell(spans)?;
    let half = (kernel.len() / 2) as isize;
    let smoothed: Vec<f64> = if kernel.len() == 1 {
        raw
    } else {
        (0..n as isize)
            .map(|j| {
                kernel
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * raw[(j + i as isize - half).rem_euclid(n as isize) as usize])
                    .sum()
            })
            .collect()
    };
    let nfreq = n / 2;
    let dens = &smoothed[1..=nfreq];
    let total: f64 = dens.iter().sum();
    if !(total > 0.0) {
        return Err(FeatureError::ZeroVariance);
    }
    let h: f64 = dens
        .iter()
        .map(|v| v / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok((h / (nfreq as f64).ln()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{ar1, sine, white_noise};
    use proptest::prelude::*;

    fn std(x: &[f64], period: usize) -> StandardizedSeries {
        StandardizedSeries::from_raw(x, period).unwrap()
    }

    #[test]
    fn alternating_acf_closed_form() {
        let x: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&x, 1).unwrap();
        assert!((r.at(1) + 0.9).abs() < 1e-12);
        assert_eq!(r.at(0), 1.0);
        assert_eq!(r.first_zero_crossing(), 1);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&[1.0, 2.0, 3.0], 3), Err(FeatureError::LagTooLarge { .. })));
        assert!(matches!(acf(&[2.0; 5], 1), Err(FeatureError::ZeroVariance)));
    }

    #[test]
    fn white_noise_acf_is_small() {
        let x = white_noise(5000, 11);
        let r = acf(&x, 10).unwrap();
        assert!(r.at(1).abs() <= 0.05);
        assert!(r.sum_sq(10) <= 0.01);
    }

    #[test]
    fn ar1_pacf_cuts_off() {
        let x = ar1(5000, 0.8, 3);
        let p = pacf(&x, 5).unwrap();
        assert!((p.at(1) - 0.8).abs() <= 0.03, "{}", p.at(1));
        for k in 2..=5 {
            assert!(p.at(k).abs() <= 0.05, "lag {k}: {}", p.at(k));
        }
        assert!((p.sum_sq(5) - 0.64).abs() <= 0.05);
    }

    #[test]
    fn pacf_first_lag_equals_acf() {
        let x = white_noise(300, 5);
        let r = acf(&x, 4).unwrap();
        let p = pacf_from_acf(&r, 4).unwrap();
        assert_eq!(p.at(1), r.at(1));
        assert!(p.sum_sq(4) >= r.at(1) * r.at(1));
    }

    #[test]
    fn pacf_singular_on_perfect_periodicity() {
        // r_1 = 1 exactly makes the lag-2 denominator vanish
        let r = AcfVector { r: vec![1.0, 1.0, 1.0], n: 10 };
        assert!(matches!(
            pacf_from_acf(&r, 3),
            Err(FeatureError::NumericalSingularity { lag: 2 })
        ));
    }

    #[test]
    fn sine_acf_features() {
        let x = sine(3650, 365.0, 0.0, 0);
        let f = acf_feature_set(&std(&x, 365), FIRSTZERO_MAX_LAG).unwrap();
        // biased estimator: (n - 365) / n times cos(2 pi) for an exact sine
        assert!((f.seas_acf1 - 0.9).abs() < 1e-3, "{}", f.seas_acf1);
        assert!((f.firstzero_ac as i64 - 92).abs() <= 2, "{}", f.firstzero_ac);
    }

    #[test]
    fn firstzero_is_capped_at_horizon() {
        // a ramp keeps positive autocorrelation past any short horizon
        let x: Vec<f64> = (0..800).map(f64::from).collect();
        let f = acf_feature_set(&std(&x, 365), 20).unwrap();
        assert_eq!(f.firstzero_ac, 20);
    }

    #[test]
    fn white_noise_features() {
        let x = white_noise(5000, 8);
        let s = std(&x, 365);
        let a = acf_feature_set(&s, FIRSTZERO_MAX_LAG).unwrap();
        assert!(a.x_acf10 <= 0.01);
        let p = pacf_feature_set(&s).unwrap();
        assert!(p.x_pacf5 <= 0.01);
        assert!(p.x_pacf5 >= a.x_acf1 * a.x_acf1);
        let h = spectral_entropy(&s, &[3, 3]).unwrap();
        assert!(h >= 0.95, "{h}");
    }

    #[test]
    fn sine_entropy_low() {
        let x = sine(3650, 365.0, 0.0, 0);
        let h = spectral_entropy(&std(&x, 365), &[3, 3]).unwrap();
        assert!(h <= 0.5, "{h}");
    }

    #[test]
    fn two_frequencies_beat_one() {
        let n = 2048;
        let one: Vec<f64> = (0..n).map(|t| (2.0 * std::f64::consts::PI * 64.0 * t as f64 / n as f64).sin()).collect();
        let two: Vec<f64> = (0..n)
            .map(|t| {
                let t = t as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 64.0 * t).sin() + (2.0 * std::f64::consts::PI * 300.0 * t).sin()
            })
            .collect();
        for spans in [&[][..], &[3, 3][..]] {
            let h1 = spectral_entropy_values(&one, spans).unwrap();
            let h2 = spectral_entropy_values(&two, spans).unwrap();
            assert!(h2 > h1, "{spans:?}: {h2} vs {h1}");
        }
    }

    #[test]
    fn daniell_weights() {
        assert_eq!(modified_daniell(&[3]).unwrap(), vec![0.25, 0.5, 0.25]);
        let k = modified_daniell(&[3, 3]).unwrap();
        let expect = [1.0, 4.0, 6.0, 4.0, 1.0].map(|v| v / 16.0);
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(modified_daniell(&[4]).is_err());
    }

    #[test]
    fn entropy_too_short() {
        assert!(matches!(
            spectral_entropy_values(&[1.0, 2.0, 0.0, 1.0], &[]),
            Err(FeatureError::TooShort { .. })
        ));
    }

    proptest! {
        #[test]
        fn acf_affine_and_reversal_invariant(
            v in prop::collection::vec(-10f64..10.0, 20..120),
            a in 0.1f64..10.0,
            b in -10f64..10.0,
        ) {
            prop_assume!(crate::series::sample_sd(&v) > 1e-3);
            let r = acf(&v, 8).unwrap();
            let mapped: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let rev: Vec<f64> = v.iter().rev().copied().collect();
            let rm = acf(&mapped, 8).unwrap();
            let rr = acf(&rev, 8).unwrap();
            for k in 1..=8 {
                prop_assert!(r.at(k).abs() <= 1.0 + 1e-12);
                prop_assert!((r.at(k) - rm.at(k)).abs() <= 1e-10);
                prop_assert!((r.at(k) - rr.at(k)).abs() <= 1e-10);
            }
            prop_assert!(r.sum_sq(8) >= r.at(1) * r.at(1));
        }

        #[test]
        fn entropy_in_unit_interval(v in prop::collection::vec(-10f64..10.0, 16..200)) {
            prop_assume!(crate::series::sample_sd(&v) > 1e-3);
            let h = spectral_entropy_values(&v, &[3, 3]).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            let h = spectral_entropy_values(&v, &[]).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
        }
    }
}
