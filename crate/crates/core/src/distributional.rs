//! Variation, level-crossing, run-length, tiled-window and nonlinearity features.

use nalgebra::{DMatrix, DVector};

use crate::error::FeatureError;
use crate::series::{difference, mean, median, sample_sd, sample_variance, StandardizedSeries};

/// Sample standard deviation of the first differences.
pub fn std1st_der(x: &StandardizedSeries) -> Result<f64, FeatureError> {
    if x.len() < 3 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 3 });
    }
    Ok(sample_sd(&difference(x.values(), 1)?))
}

/// Number of times consecutive values fall on different sides of the median.
pub fn crossing_points(x: &[f64]) -> Result<usize, FeatureError> {
    if x.len() < 2 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 2 });
    }
    let m = median(x);
    Ok(x.windows(2).filter(|w| (w[0] <= m) != (w[1] <= m)).count())
}

/// Longest run of equal labels after cutting the range into 10 equal-width bins.
pub fn flat_spots(x: &[f64]) -> Result<usize, FeatureError> {
    if x.len() < 10 {
        return Err(FeatureError::TooShort { len: x.len(), needed: 10 });
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return Err(FeatureError::DegenerateRange);
    }
    let bin = |v: f64| (((v - lo) / (hi - lo) * 10.0).floor() as usize).min(9);
    let mut best = 1;
    let mut run = 1;
    for w in x.windows(2) {
        if bin(w[0]) == bin(w[1]) {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    Ok(best)
}

/// Means and variances of consecutive non-overlapping windows.
#[derive(Debug, Clone, PartialEq)]
pub struct TiledWindowStats {
    pub window_means: Vec<f64>,
    pub window_variances: Vec<f64>,
    pub width: usize,
}

impl TiledWindowStats {
    pub fn compute(x: &[f64], width: usize) -> Result<Self, FeatureError> {
        if width < 2 {
            return Err(FeatureError::InvalidParameter(format!(
                "tile width {width} must be at least 2"
            )));
        }
        if x.len() < 2 * width {
            return Err(FeatureError::TooShort {
                len: x.len(),
                needed: 2 * width,
            });
        }
        let (window_means, window_variances) = x
            .chunks_exact(width)
            .map(|w| (mean(w), sample_variance(w)))
            .unzip();
        Ok(Self {
            window_means,
            window_variances,
            width,
        })
    }

    pub fn stability(&self) -> f64 {
        sample_variance(&self.window_means)
    }

    pub fn lumpiness(&self) -> f64 {
        sample_variance(&self.window_variances)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiledFeatures {
    pub lumpiness: f64,
    pub stability: f64,
}

pub fn tiled_stats(x: &StandardizedSeries, width: usize) -> Result<TiledFeatures, FeatureError> {
    let t = TiledWindowStats::compute(x.values(), width)?;
    Ok(TiledFeatures {
        lumpiness: t.lumpiness(),
        stability: t.stability(),
    })
}

fn residuals(design: DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>, FeatureError> {
    let qr = design.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if !(diag_max > 0.0) || r.diagonal().iter().any(|v| v.abs() <= 1e-10 * diag_max) {
        return Err(FeatureError::SingularDesign);
    }
    let q = qr.q();
    let fitted = &q * (q.transpose() * y);
    Ok(y - fitted)
}

/// Teräsvirta neural-network linearity test with two lags and cubic expansion,
/// reported as `10 * n R^2 / n_series`.
pub fn nonlinearity(x: &[f64]) -> Result<f64, FeatureError> {
    let n = x.len();
    if n < 20 {
        return Err(FeatureError::TooShort { len: n, needed: 20 });
    }
    let m = n - 2;
    let y = DVector::from_iterator(m, x[2..].iter().copied());
    let lag1 = &x[1..n - 1];
    let lag2 = &x[..n - 2];

    let linear = DMatrix::from_fn(m, 3, |i, j| match j {
        0 => 1.0,
        1 => lag1[i],
        _ => lag2[i],
    });
    let u = residuals(linear, &y)?;
    let ssr0 = u.norm_squared();
    if !(ssr0 > 0.0) {
        return Err(FeatureError::SingularDesign);
    }

    let aux = DMatrix::from_fn(m, 10, |i, j| {
        let (a, b) = (lag1[i], lag2[i]);
        match j {
            0 => 1.0,
            1 => a,
            2 => b,
            3 => a * a,
            4 => a * b,
            5 => b * b,
            6 => a * a * a,
            7 => a * a * b,
            8 => a * b * b,
            _ => b * b * b,
        }
    });
    let v = residuals(aux, &u)?;
    let r2 = (1.0 - v.norm_squared() / ssr0).max(0.0);
    let stat = m as f64 * r2;
    Ok(10.0 * stat / n as f64)
}
