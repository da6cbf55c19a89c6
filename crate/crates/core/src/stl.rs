//! Seasonal-trend decomposition by Loess and the features derived from it.
//!
//! The decomposition follows the classic inner/outer loop: the detrended series
//! is split into cycle-subseries that are smoothed and extended one cycle at each
//! end, a low-pass filter (two moving averages of the period length, one of
//! length 3, then a loess pass) removes leakage of the trend into the seasonal
//! estimate, and the trend is re-estimated by loess on the deseasonalized series.

use serde::{Deserialize, Serialize};

use crate::dependence::acf;
use crate::error::FeatureError;
use crate::series::{mean, sample_variance, StandardizedSeries};

/// How each cycle-subseries is smoothed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeasonalWindow {
    /// Every subseries collapses to its (robustness-weighted) mean.
    Periodic,
    /// Loess with the given odd span over each subseries.
    Span(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StlConfig {
    pub seasonal: SeasonalWindow,
    pub seasonal_degree: usize,
    /// Trend loess span; `None` picks the default for the seasonal window.
    pub trend_span: Option<usize>,
    /// Low-pass loess span; `None` is the smallest odd integer >= period.
    pub lowpass_span: Option<usize>,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    /// Circular local-quadratic span applied to the mean seasonal shape before
    /// locating peak and trough; `None` is the smallest odd integer >= period / 2,
    /// `Some(1)` uses the raw per-position means.
    pub peak_smoothing_span: Option<usize>,
}

impl Default for StlConfig {
    fn default() -> Self {
        Self {
            seasonal: SeasonalWindow::Periodic,
            seasonal_degree: 0,
            trend_span: None,
            lowpass_span: None,
            inner_iterations: 2,
            outer_iterations: 0,
            peak_smoothing_span: None,
        }
    }
}

fn next_odd(x: usize) -> usize {
    if x % 2 == 0 {
        x + 1
    } else {
        x
    }
}

impl StlConfig {
    pub fn trend_span_for(&self, period: usize) -> usize {
        if let Some(s) = self.trend_span {
            return next_odd(s.max(3));
        }
        match self.seasonal {
            SeasonalWindow::Periodic => 2 * period + 1,
            SeasonalWindow::Span(ns) => {
                let ns = ns as f64;
                let raw = 1.5 * period as f64 / (1.0 - 1.5 / ns);
                next_odd(raw.ceil().max(3.0) as usize)
            }
        }
    }

    pub fn peak_span_for(&self, period: usize) -> usize {
        match self.peak_smoothing_span {
            Some(s) => next_odd(s.max(1)),
            None => next_odd((period / 2).max(3)),
        }
    }

    pub fn lowpass_span_for(&self, period: usize) -> usize {
        next_odd(self.lowpass_span.unwrap_or(period).max(3))
    }

    fn check(&self, period: usize) -> Result<(), FeatureError> {
        if let SeasonalWindow::Span(ns) = self.seasonal {
            if ns < 3 || ns % 2 == 0 {
                return Err(FeatureError::InvalidParameter(format!(
                    "seasonal span {ns} must be odd and >= 3"
                )));
            }
        }
        if self.seasonal_degree > 1 {
            return Err(FeatureError::InvalidParameter("seasonal degree must be 0 or 1".into()));
        }
        if self.inner_iterations == 0 {
            return Err(FeatureError::InvalidParameter("inner iterations must be >= 1".into()));
        }
        if period < 2 {
            return Err(FeatureError::InvalidParameter("period must be >= 2".into()));
        }
        Ok(())
    }
}

/// Weighted local polynomial fit evaluated at position `x0`; data sit at 0..n-1.
///
/// Returns `None` when every weight in the window vanishes.
fn loess_at(y: &[f64], x0: f64, span: usize, degree: usize, rw: Option<&[f64]>) -> Option<f64> {
    let n = y.len();
    let (left, right, h) = if span >= n {
        let h = (x0).max(n as f64 - 1.0 - x0) + (span - n) as f64 / 2.0;
        (0, n - 1, h)
    } else {
        let half = (span - 1) / 2;
        let centre = x0.round().clamp(0.0, (n - 1) as f64) as usize;
        let left = centre.saturating_sub(half).min(n - span);
        let right = left + span - 1;
        let h = (x0 - left as f64).max(right as f64 - x0);
        (left, right, h)
    };
    let h = h.max(0.5);
    let (lo_cut, hi_cut) = (0.001 * h, 0.999 * h);

    // weighted moments of the centred position d = j - x0
    let mut s = [0.0_f64; 5];
    let mut t = [0.0_f64; 3];
    for j in left..=right {
        let d = j as f64 - x0;
        let r = d.abs();
        if r > hi_cut {
            continue;
        }
        let mut w = if r <= lo_cut {
            1.0
        } else {
            let q = r / h;
            let c = 1.0 - q * q * q;
            c * c * c
        };
        if let Some(rw) = rw {
            w *= rw[j];
        }
        if w <= 0.0 {
            continue;
        }
        let mut p = w;
        for k in 0..5 {
            s[k] += p;
            if k < 3 {
                t[k] += p * y[j];
            }
            p *= d;
        }
    }
    if !(s[0] > 0.0) {
        return None;
    }
    let mut deg = degree.min(2);
    loop {
        if let Some(v) = solve_intercept(&s, &t, deg) {
            return Some(v);
        }
        if deg == 0 {
            return Some(t[0] / s[0]);
        }
        deg -= 1;
    }
}

/// Intercept of the weighted polynomial fit from its moment matrix; `None` if singular.
fn solve_intercept(s: &[f64; 5], t: &[f64; 3], degree: usize) -> Option<f64> {
    let m = degree + 1;
    let mut a = [[0.0_f64; 4]; 3];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = s[i + j];
        }
        a[i][3] = t[i];
    }
    let scale = (0..m).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, piv);
        for row in 0..m {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    Some(a[0][3] / a[0][0])
}

/// Loess smoothing of `y` at every position, with tricube neighbourhood weights
/// optionally multiplied by robustness weights.
pub fn loess_smooth(
    y: &[f64],
    span: usize,
    degree: usize,
    robustness_weights: Option<&[f64]>,
) -> Result<Vec<f64>, FeatureError> {
    if degree > 2 {
        return Err(FeatureError::InvalidParameter("loess degree must be 0, 1 or 2".into()));
    }
    if span < degree + 1 {
        return Err(FeatureError::InvalidParameter(format!(
            "loess span {span} too small for degree {degree}"
        )));
    }
    if let Some(rw) = robustness_weights {
        if rw.len() != y.len() {
            return Err(FeatureError::InvalidParameter("robustness weights length mismatch".into()));
        }
    }
    (0..y.len())
        .map(|i| {
            loess_at(y, i as f64, span, degree, robustness_weights)
                .ok_or(FeatureError::SingularFit { position: i })
        })
        .collect()
}

fn moving_average(x: &[f64], len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1 - len);
    let mut acc: f64 = x[..len].iter().sum();
    out.push(acc / len as f64);
    for i in len..x.len() {
        acc += x[i] - x[i - len];
        out.push(acc / len as f64);
    }
    out
}

/// Additive split of a series into trend, seasonal and remainder components.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
    pub period: usize,
}

pub fn stl_decompose(x: &StandardizedSeries, config: &StlConfig) -> Result<Decomposition, FeatureError> {
    decompose_values(x.values(), x.period(), config)
}

pub fn decompose_values(
    y: &[f64],
    period: usize,
    config: &StlConfig,
) -> Result<Decomposition, FeatureError> {
    config.check(period)?;
    let n = y.len();
    if n < 2 * period {
        return Err(FeatureError::TooShort {
            len: n,
            needed: 2 * period,
        });
    }
    let trend_span = config.trend_span_for(period);
    let lowpass_span = config.lowpass_span_for(period);

    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut weights: Option<Vec<f64>> = None;
    let mut cycle = vec![0.0; n + 2 * period];
    let mut detrended = vec![0.0; n];
    let mut deseason = vec![0.0; n];

    for outer in 0..=config.outer_iterations {
        for _ in 0..config.inner_iterations {
            for i in 0..n {
                detrended[i] = y[i] - trend[i];
            }
            smooth_cycles(&detrended, period, config, weights.as_deref(), &mut cycle)?;
            let low = low_pass(&cycle, period, lowpass_span)?;
            for i in 0..n {
                seasonal[i] = cycle[period + i] - low[i];
                deseason[i] = y[i] - seasonal[i];
            }
            trend = loess_smooth(&deseason, trend_span, 1, weights.as_deref())?;
        }
        if outer < config.outer_iterations {
            let resid: Vec<f64> = (0..n).map(|i| y[i] - trend[i] - seasonal[i]).collect();
            weights = Some(robustness_weights(&resid));
        }
    }

    if config.seasonal == SeasonalWindow::Periodic {
        let shape = cycle_means(&seasonal, period);
        for (i, s) in seasonal.iter_mut().enumerate() {
            *s = shape[i % period];
        }
    }
    let remainder = (0..n).map(|i| y[i] - trend[i] - seasonal[i]).collect();
    Ok(Decomposition {
        trend,
        seasonal,
        remainder,
        period,
    })
}

/// Smooths every cycle-subseries and writes the result, extended by one cycle
/// on both sides, into `out` (length n + 2 * period).
fn smooth_cycles(
    y: &[f64],
    period: usize,
    config: &StlConfig,
    rw: Option<&[f64]>,
    out: &mut [f64],
) -> Result<(), FeatureError> {
    let n = y.len();
    let mut sub = Vec::with_capacity(n / period + 1);
    let mut sub_w = Vec::with_capacity(n / period + 1);
    for j in 0..period {
        sub.clear();
        sub_w.clear();
        let mut t = j;
        while t < n {
            sub.push(y[t]);
            sub_w.push(rw.map_or(1.0, |w| w[t]));
            t += period;
        }
        let m = sub.len();
        let weights = rw.map(|_| sub_w.as_slice());
        for k in -1..=(m as isize) {
            let v = match config.seasonal {
                SeasonalWindow::Periodic => {
                    let (sw, swy) = sub
                        .iter()
                        .zip(&sub_w)
                        .fold((0.0, 0.0), |(a, b), (v, w)| (a + w, b + w * v));
                    if sw > 0.0 {
                        swy / sw
                    } else {
                        mean(&sub)
                    }
                }
                SeasonalWindow::Span(ns) => {
                    loess_at(&sub, k as f64, ns, config.seasonal_degree, weights).unwrap_or_else(|| {
                        let idx = k.clamp(0, m as isize - 1) as usize;
                        sub[idx]
                    })
                }
            };
            out[((k + 1) as usize) * period + j] = v;
        }
        // positions past the extended end of shorter subseries stay unused
    }
    Ok(())
}

fn low_pass(cycle: &[f64], period: usize, span: usize) -> Result<Vec<f64>, FeatureError> {
    let a = moving_average(cycle, period);
    let b = moving_average(&a, period);
    let c = moving_average(&b, 3);
    loess_smooth(&c, span, 1, None)
}

fn robustness_weights(resid: &[f64]) -> Vec<f64> {
    let abs: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
    let h = 6.0 * crate::series::median(&abs);
    abs.iter()
        .map(|&r| {
            if h <= 0.0 {
                1.0
            } else {
                let u = r / h;
                if u <= 0.001 {
                    1.0
                } else if u < 0.999 {
                    let c = 1.0 - u * u;
                    c * c
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Mean of `x` at each cycle position 0..period-1.
fn cycle_means(x: &[f64], period: usize) -> Vec<f64> {
    let mut sum = vec![0.0; period];
    let mut cnt = vec![0usize; period];
    for (i, v) in x.iter().enumerate() {
        sum[i % period] += v;
        cnt[i % period] += 1;
    }
    sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StlFeatureSet {
    pub trend_strength: f64,
    pub seasonal_strength: f64,
    pub spike: f64,
    pub linearity: f64,
    pub curvature: f64,
    pub e_acf1: f64,
    pub e_acf10: f64,
    pub peak: usize,
    pub trough: usize,
}

fn strength(remainder: &[f64], component: &[f64]) -> Result<f64, FeatureError> {
    let combined: Vec<f64> = component.iter().zip(remainder).map(|(a, b)| a + b).collect();
    let vc = sample_variance(&combined);
    if !(vc > 0.0) {
        return Err(FeatureError::DegenerateVariance);
    }
    Ok((1.0 - sample_variance(remainder) / vc).clamp(0.0, 1.0))
}

/// Sample variance of the n leave-one-out sample variances, in O(n).
pub fn leave_one_out_variance_spread(x: &[f64]) -> Result<f64, FeatureError> {
    let n = x.len();
    if n < 4 {
        return Err(FeatureError::TooShort { len: n, needed: 4 });
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let nf = n as f64;
    let loo: Vec<f64> = x
        .iter()
        .map(|v| {
            let d = v - m;
            (ss - nf / (nf - 1.0) * d * d) / (nf - 2.0)
        })
        .collect();
    Ok(sample_variance(&loo))
}

/// Orthonormal degree-1 and degree-2 polynomial regressors over t = 1..n.
pub fn orthonormal_poly(n: usize) -> (Vec<f64>, Vec<f64>) {
    let c = (n as f64 + 1.0) / 2.0;
    let t: Vec<f64> = (1..=n).map(|i| i as f64 - c).collect();
    let mut q1: Vec<f64> = t.clone();
    let m1 = mean(&q1);
    q1.iter_mut().for_each(|v| *v -= m1);
    normalize(&mut q1);
    let mut q2: Vec<f64> = t.iter().map(|v| v * v).collect();
    let m2 = mean(&q2);
    q2.iter_mut().for_each(|v| *v -= m2);
    let p = dot(&q2, &q1);
    q2.iter_mut().zip(&q1).for_each(|(a, b)| *a -= p * b);
    normalize(&mut q2);
    (q1, q2)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// 1-based cycle positions of the maximum and minimum of the mean seasonal shape,
/// after circular smoothing with `span` (1 disables smoothing). Ties go to the
/// smallest position.
pub fn peak_trough(seasonal: &[f64], period: usize, span: usize) -> (usize, usize) {
    let mut shape = cycle_means(seasonal, period);
    if span > 1 {
        let tiled: Vec<f64> = shape.iter().cycle().take(3 * period).copied().collect();
        if let Ok(smooth) = loess_smooth(&tiled, span.min(3 * period), 2, None) {
            shape = smooth[period..2 * period].to_vec();
        }
    }
    let mut peak = 0;
    let mut trough = 0;
    for (i, &v) in shape.iter().enumerate() {
        if v > shape[peak] {
            peak = i;
        }
        if v < shape[trough] {
            trough = i;
        }
    }
    (peak + 1, trough + 1)
}

pub fn stl_feature_set(d: &Decomposition, config: &StlConfig) -> Result<StlFeatureSet, FeatureError> {
    let trend_strength = strength(&d.remainder, &d.trend)?;
    let seasonal_strength = strength(&d.remainder, &d.seasonal)?;
    let spike = leave_one_out_variance_spread(&d.remainder)?;
    let (q1, q2) = orthonormal_poly(d.trend.len());
    let linearity = dot(&d.trend, &q1);
    let curvature = dot(&d.trend, &q2);
    let r = acf(&d.remainder, 10)?;
    let (peak, trough) = peak_trough(&d.seasonal, d.period, config.peak_span_for(d.period));
    Ok(StlFeatureSet {
        trend_strength,
        seasonal_strength,
        spike,
        linearity,
        curvature,
        e_acf1: r.at(1),
        e_acf10: r.sum_sq(10),
        peak,
        trough,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{sine, white_noise};
    use proptest::prelude::*;

    fn std(x: &[f64], period: usize) -> StandardizedSeries {
        StandardizedSeries::from_raw(x, period).unwrap()
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (mean(a), mean(b));
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let da: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
        let db: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
        num / (da * db).sqrt()
    }

    #[test]
    fn loess_reproduces_lines_and_constants() {
        let line: Vec<f64> = (0..40).map(|i| 3.0 - 0.25 * i as f64).collect();
        for span in [3, 7, 15, 41, 101] {
            let s = loess_smooth(&line, span, 1, None).unwrap();
            for (a, b) in s.iter().zip(&line) {
                assert!((a - b).abs() < 1e-8, "span {span}");
            }
        }
        let c = vec![4.2; 25];
        let s = loess_smooth(&c, 5, 0, None).unwrap();
        assert!(s.iter().all(|v| (v - 4.2).abs() < 1e-12));
    }

    #[test]
    fn loess_reproduces_quadratics() {
        let q: Vec<f64> = (0..60).map(|i| {
            let t = i as f64;
            0.02 * t * t - 0.7 * t + 5.0
        }).collect();
        let s = loess_smooth(&q, 11, 2, None).unwrap();
        for i in 5..55 {
            assert!((s[i] - q[i]).abs() < 1e-6, "{i}: {} vs {}", s[i], q[i]);
        }
    }

    #[test]
    fn loess_zero_weights_is_singular() {
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let w = vec![0.0; 4];
        assert!(matches!(
            loess_smooth(&y, 3, 1, Some(&w)),
            Err(FeatureError::SingularFit { position: 0 })
        ));
    }

    #[test]
    fn sine_decomposes_into_season() {
        let x = sine(3650, 365.0, 0.01, 1);
        let d = stl_decompose(&std(&x, 365), &StlConfig::default()).unwrap();
        let pure: Vec<f64> = (0..3650)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 365.0).sin())
            .collect();
        assert!(corr(&d.seasonal, &pure) >= 0.99);
        assert!(mean(&d.trend).abs() < 0.05);
        assert!(sample_variance(&d.trend) < 0.01);
        let f = stl_feature_set(&d, &StlConfig::default()).unwrap();
        assert!(f.seasonal_strength >= 0.95);
        assert!(f.trend_strength <= 0.2);
        assert!((f.peak as i64 - 92).abs() <= 1, "{}", f.peak);
        assert!((f.trough as i64 - 274).abs() <= 1, "{}", f.trough);
    }

    #[test]
    fn ramp_goes_to_trend() {
        let noise = white_noise(3650, 2);
        let x: Vec<f64> = (0..3650).map(|t| 0.001 * t as f64 + 0.01 * noise[t]).collect();
        let d = stl_decompose(&std(&x, 365), &StlConfig::default()).unwrap();
        let t: Vec<f64> = (0..3650).map(|t| t as f64).collect();
        assert!(corr(&d.trend, &t) >= 0.99);
        let f = stl_feature_set(&d, &StlConfig::default()).unwrap();
        assert!(f.trend_strength >= 0.95);
        assert!(f.seasonal_strength <= 0.2);
        assert!(f.linearity > 0.0);
    }

    #[test]
    fn white_noise_remainder_uncorrelated() {
        let x = white_noise(3650, 5);
        let d = stl_decompose(&std(&x, 365), &StlConfig::default()).unwrap();
        let f = stl_feature_set(&d, &StlConfig::default()).unwrap();
        assert!(f.e_acf1.abs() <= 0.05, "{}", f.e_acf1);
    }

    #[test]
    fn finite_window_and_robust_iterations_reconstruct() {
        let x = sine(1500, 50.0, 0.3, 9);
        let s = std(&x, 50);
        let cfg = StlConfig {
            seasonal: SeasonalWindow::Span(13),
            seasonal_degree: 1,
            outer_iterations: 2,
            ..StlConfig::default()
        };
        let d = stl_decompose(&s, &cfg).unwrap();
        for i in 0..s.len() {
            let sum = d.trend[i] + d.seasonal[i] + d.remainder[i];
            assert!((sum - s.values()[i]).abs() <= 1e-8);
        }
        let f = stl_feature_set(&d, &StlConfig::default()).unwrap();
        assert!(f.seasonal_strength > 0.5);
    }

    #[test]
    fn default_spans() {
        let c = StlConfig::default();
        assert_eq!(c.trend_span_for(365), 731);
        assert_eq!(c.lowpass_span_for(365), 365);
        assert_eq!(c.lowpass_span_for(12), 13);
        let f = StlConfig { seasonal: SeasonalWindow::Span(13), ..c };
        // 1.5 * 12 / (1 - 1.5 / 13) = 20.35
        assert_eq!(f.trend_span_for(12), 21);
    }

    #[test]
    fn too_short_is_rejected() {
        let x = white_noise(500, 1);
        assert!(matches!(
            stl_decompose(&std(&x, 365), &StlConfig::default()),
            Err(FeatureError::TooShort { .. })
        ));
    }

    #[test]
    fn degenerate_variance() {
        let d = Decomposition {
            trend: vec![0.0; 8],
            seasonal: vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
            remainder: vec![0.0; 8],
            period: 2,
        };
        assert!(matches!(stl_feature_set(&d, &StlConfig::default()), Err(FeatureError::DegenerateVariance)));
    }

    #[test]
    fn spike_matches_brute_force() {
        let x = white_noise(60, 3);
        let loo: Vec<f64> = (0..x.len())
            .map(|i| {
                let rest: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                sample_variance(&rest)
            })
            .collect();
        let expect = sample_variance(&loo);
        let got = leave_one_out_variance_spread(&x).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect.max(1e-300), "{got} vs {expect}");
    }

    #[test]
    fn orthonormal_basis() {
        let (q1, q2) = orthonormal_poly(101);
        assert!((dot(&q1, &q1) - 1.0).abs() < 1e-12);
        assert!((dot(&q2, &q2) - 1.0).abs() < 1e-12);
        assert!(dot(&q1, &q2).abs() < 1e-12);
        assert!(q1.iter().sum::<f64>().abs() < 1e-12);
        assert!(q2.iter().sum::<f64>().abs() < 1e-12);
        assert!(q1.windows(2).all(|w| w[1] > w[0]));
        assert!(q2[0] > q2[50]);
    }

    #[test]
    fn peak_tie_breaks_to_smallest_index() {
        let s = vec![1.0, 3.0, 3.0, -2.0, -2.0, 0.0];
        assert_eq!(peak_trough(&s, 6, 1), (2, 4));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reconstruction_holds(seed in 0u64..1000, amp in 0.0f64..3.0, noise in 0.05f64..2.0) {
            let period = 24;
            let w = white_noise(240, seed);
            let x: Vec<f64> = (0..240)
                .map(|t| amp * (2.0 * std::f64::consts::PI * t as f64 / period as f64).cos() + noise * w[t] + 0.01 * t as f64)
                .collect();
            let s = std(&x, period);
            let d = stl_decompose(&s, &StlConfig::default()).unwrap();
            prop_assert_eq!(d.trend.len(), 240);
            for i in 0..240 {
                prop_assert!((d.trend[i] + d.seasonal[i] + d.remainder[i] - s.values()[i]).abs() <= 1e-8);
            }
            let f = stl_feature_set(&d, &StlConfig::default()).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.trend_strength));
            prop_assert!((0.0..=1.0).contains(&f.seasonal_strength));
            prop_assert!(f.spike >= 0.0);
            let shifted: Vec<f64> = d.seasonal.iter().map(|v| v + 5.0).collect();
            for span in [1, 13] {
                prop_assert_eq!(peak_trough(&d.seasonal, period, span), peak_trough(&shifted, period, span));
            }
        }
    }
}
