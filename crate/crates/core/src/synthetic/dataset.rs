//! A seeded synthetic catchment dataset in the on-disk input format.
//!
//! Each catchment gets 19 static attributes and daily `tmin`, `tmax`, `prcp`
//! and `streamflow` series. The generator plants two relationships:
//!
//! * streamflow `x_acf1` is a noisy increasing function of the precipitation
//!   features `peak` and `lumpiness` (through the storage recession constant);
//! * the streamflow seasonal phase lags precipitation by a delay that grows
//!   with `log_elev_mean` (a stand-in for snow storage).
//!
//! Everything else is independent noise, so the planted pair is the only route
//! from predictors to the planted target.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::engine::{extract_features, FeatureConfig};
use crate::error::FeatureError;
use crate::regionalization::ingest::IngestConfig;
use crate::regionalization::records::{N_STATIC, STATIC_ATTRIBUTES};
use crate::series::{TimeSeries, VariableKind};

pub const SYNTHETIC_CATCHMENTS: usize = 60;
pub const SYNTHETIC_SEED: u64 = 20_240_601;

/// The streamflow feature that carries the planted signal.
pub const PLANTED_TARGET: &str = "x_acf1";
/// Predictor columns it was constructed from.
pub const PLANTED_PREDICTORS: [&str; 2] = ["precipitation.peak", "precipitation.lumpiness"];

/// Streamflow recession constant from the two planted precipitation features.
pub fn planted_recession(peak: f64, lumpiness: f64) -> f64 {
    let a = ((peak - 40.0) / 240.0).clamp(0.0, 1.0);
    // Lumpiness of standardized log-normal rainfall spans roughly 0.1..10.
    let b = ((lumpiness.max(1e-12).log10() + 1.0) / 2.0).clamp(0.0, 1.0);
    0.3 + 0.35 * a + 0.3 * b
}

const RECESSION_NOISE_SD: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n_catchments: usize,
    pub seed: u64,
    pub window: IngestConfig,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_catchments: SYNTHETIC_CATCHMENTS,
            seed: SYNTHETIC_SEED,
            window: IngestConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCatchment {
    pub id: String,
    pub attributes: [f64; N_STATIC],
    pub tmin: Vec<f64>,
    pub tmax: Vec<f64>,
    pub prcp: Vec<f64>,
    pub streamflow: Vec<f64>,
    /// Recession constant used for streamflow (ground truth of the planted signal).
    pub recession: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub dates: Vec<NaiveDate>,
    pub catchments: Vec<SyntheticCatchment>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Unit-variance Gaussian AR(1) path.
fn ar1_path(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    let scale = (1.0 - phi * phi).sqrt();
    let mut x = normal(rng);
    (0..n)
        .map(|_| {
            let out = x;
            x = phi * x + scale * normal(rng);
            out
        })
        .collect()
}

fn static_attributes(rng: &mut ChaCha8Rng) -> [f64; N_STATIC] {
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let (sand, silt, clay) = {
        let w = [u(0.2, 1.0), u(0.2, 1.0), u(0.1, 0.8)];
        let s: f64 = w.iter().sum();
        (100.0 * w[0] / s, 100.0 * w[1] / s, 100.0 * w[2] / s)
    };
    [
        u(50f64.log10(), 3500f64.log10()),
        u(0.0, 200f64.log10()),
        u(1.0, 2000f64.log10()),
        u(0.0, 1.0),
        u(0.5, 5.5),
        u(0.05, 0.6),
        u(0.3, 1.0),
        u(1.0, 50.0),
        u(0.5, 1.5),
        u(0.1, 1.0),
        sand,
        silt,
        clay,
        u(0.0, 5.0),
        u(0.0, 3.0),
        u(0.0, 10.0),
        u(0.0, 1.0),
        u(0.01, 0.3),
        u(-16.0, -12.0),
    ]
}

fn elevation_fraction(log_elev: f64) -> f64 {
    ((log_elev - 50f64.log10()) / (3500f64.log10() - 50f64.log10())).clamp(0.0, 1.0)
}

fn seasonal(t: usize, phase: f64, period: usize) -> f64 {
    (2.0 * PI * (t as f64 - phase) / period as f64).cos()
}

fn catchment(
    index: usize,
    config: &SyntheticConfig,
    n: usize,
    features: &FeatureConfig,
) -> Result<SyntheticCatchment, FeatureError> {
    let period = config.window.period;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let attributes = static_attributes(&mut rng);
    let elev = elevation_fraction(attributes[0]);

    // Temperature: colder and more seasonal with elevation.
    let t_mean = 14.0 - 10.0 * elev + rng.gen_range(-2.0..2.0);
    let t_amp = 6.0 + 6.0 * elev + rng.gen_range(0.0..3.0);
    let t_phase = rng.gen_range(190.0..215.0);
    let t_persistence = rng.gen_range(0.6..0.85);
    let t_noise = ar1_path(&mut rng, n, t_persistence);
    let t_noise_sd = rng.gen_range(1.5..3.5);
    let mut tmin = Vec::with_capacity(n);
    let mut tmax = Vec::with_capacity(n);
    for (t, z) in t_noise.iter().enumerate() {
        let mid = t_mean + t_amp * seasonal(t, t_phase, period) + t_noise_sd * z;
        let range = 10.0 + 2.0 * normal(&mut rng).abs();
        tmin.push(mid - range / 2.0);
        tmax.push(mid + range / 2.0);
    }

    // Precipitation: log-normal with a seasonal cycle and year-to-year variance swings.
    let p_amp = rng.gen_range(0.4..1.5);
    let p_phase = rng.gen_range(40.0..280.0);
    let p_volatility = rng.gen_range(0.0..0.6);
    let p_persistence = rng.gen_range(0.1..0.4);
    let p_noise = ar1_path(&mut rng, n, p_persistence);
    let year_scale: Vec<f64> = (0..n.div_ceil(period))
        .map(|_| (p_volatility * normal(&mut rng)).exp())
        .collect();
    let p_level = rng.gen_range(1.0..4.0);
    let prcp: Vec<f64> = p_noise
        .iter()
        .enumerate()
        .map(|(t, z)| {
            let latent = p_amp * seasonal(t, p_phase, period) + year_scale[t / period] * z;
            p_level * (0.6 * latent).exp()
        })
        .collect();

    let p_features = extract_features(
        &TimeSeries::new(prcp.clone(), config.window.start, period, VariableKind::Precipitation),
        features,
    )?;
    let peak = p_features.get("peak").expect("canonical feature");
    let lumpiness = p_features.get("lumpiness").expect("canonical feature");
    let recession =
        (planted_recession(peak, lumpiness) + RECESSION_NOISE_SD * normal(&mut rng)).clamp(0.05, 0.98);

    // Streamflow: lagged seasonal cycle plus storage noise with the planted recession.
    let q_phase = p_phase + 20.0 + 60.0 * elev;
    let q_level = rng.gen_range(0.5..20.0);
    let storage = ar1_path(&mut rng, n, recession);
    let streamflow = storage
        .iter()
        .enumerate()
        .map(|(t, s)| q_level * (0.5 * (0.8 * seasonal(t, q_phase, period) + s)).exp())
        .collect();

    Ok(SyntheticCatchment {
        id: format!("syn{:03}", index + 1),
        attributes,
        tmin,
        tmax,
        prcp,
        streamflow,
        recession,
    })
}

/// Generates the dataset; precipitation features are computed with `features`
/// so the planted relationship refers to exactly what ingestion will extract.
pub fn generate(config: &SyntheticConfig, features: &FeatureConfig) -> Result<SyntheticDataset, FeatureError> {
    use rayon::prelude::*;
    let dates = config.window.dates();
    let catchments = (0..config.n_catchments)
        .into_par_iter()
        .map(|i| catchment(i, config, dates.len(), features))
        .collect::<Result<_, _>>()?;
    Ok(SyntheticDataset { dates, catchments })
}

fn write_series(path: &Path, dates: &[NaiveDate], values: &[f64]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "date,value")?;
    for (d, v) in dates.iter().zip(values) {
        writeln!(w, "{},{}", d.format("%Y-%m-%d"), v)?;
    }
    w.flush()
}

impl SyntheticDataset {
    /// Writes `attributes.csv` and `series/<id>_<variable>.csv` under `dir`;
    /// returns (series directory, attributes file).
    pub fn write(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        let series_dir = dir.join("series");
        fs::create_dir_all(&series_dir)?;
        let attributes_file = dir.join("attributes.csv");
        let mut w = BufWriter::new(fs::File::create(&attributes_file)?);
        writeln!(w, "catchment_id,{}", STATIC_ATTRIBUTES.join(","))?;
        for c in &self.catchments {
            let values: Vec<String> = c.attributes.iter().map(f64::to_string).collect();
            writeln!(w, "{},{}", c.id, values.join(","))?;
            for (suffix, values) in [
                ("tmin", &c.tmin),
                ("tmax", &c.tmax),
                ("prcp", &c.prcp),
                ("streamflow", &c.streamflow),
            ] {
                write_series(&series_dir.join(format!("{}_{suffix}.csv", c.id)), &self.dates, values)?;
            }
        }
        w.flush()?;
        Ok((series_dir, attributes_file))
    }
}
