//! Seeded reference signals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normals(n: usize, seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(move |_| StandardNormal.sample(&mut rng))
}

/// Independent standard-normal draws.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    normals(n, seed).collect()
}

/// Gaussian AR(1) with unit innovation variance, started from its stationary law.
pub fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut e = normals(n, seed);
    let mut out = Vec::with_capacity(n);
    let mut prev = e.next().unwrap_or(0.0) / (1.0 - phi * phi).sqrt();
    out.push(prev);
    for z in e {
        prev = phi * prev + z;
        out.push(prev);
    }
    out.truncate(n);
    out
}

/// `sin(2 pi t / period)` for t = 0..n-1 plus Gaussian noise of the given sd.
pub fn sine(n: usize, period: f64, noise_sd: f64, seed: u64) -> Vec<f64> {
    normals(n, seed)
        .enumerate()
        .map(|(t, z)| (2.0 * std::f64::consts::PI * t as f64 / period).sin() + noise_sd * z)
        .collect()
}

/// `slope * t` for t = 0..n-1 plus Gaussian noise of the given sd.
pub fn ramp(n: usize, slope: f64, noise_sd: f64, seed: u64) -> Vec<f64> {
    normals(n, seed)
        .enumerate()
        .map(|(t, z)| slope * t as f64 + noise_sd * z)
        .collect()
}
