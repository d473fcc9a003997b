//! Nonparametric two-sample bootstrap: standard errors, percentile intervals
//! and pointwise CDF bands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::{empirical_likelihood_estimate, plugin_estimate};
use crate::error::{Error, Result};
use crate::estimate::{Method, MixtureEstimate};
use crate::isotonic::pava;
use crate::isotonic::WeightedSequence;
use crate::mml::{fit_mml_on_grid, EmConfig};
use crate::sample::{EvalGrid, TwoSampleData, ZeroInflatedSample};
use crate::scalar::Scalar;

/// Share of dropped replicates above which a summary is flagged.
pub const MAX_DROP_RATE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub level: f64,
    pub seed: u64,
    /// Grid trimming and EM settings; `q` is used by every estimator.
    pub em: EmConfig,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_boot: 1000,
            level: 0.95,
            seed: 0,
            em: EmConfig::default(),
        }
    }
}

/// Pointwise interval at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPoint {
    pub t: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub method: Method,
    pub n_boot: usize,
    pub used: usize,
    pub dropped: usize,
    /// More than 10% of replicates were degenerate.
    pub flagged: bool,
    pub level: f64,
    pub lambda: f64,
    pub p: f64,
    pub se_lambda: f64,
    pub se_p: f64,
    pub ci_lambda: (f64, f64),
    pub ci_p: (f64, f64),
    pub band_f1: Vec<BandPoint>,
    pub band_f2: Vec<BandPoint>,
}

impl BootstrapSummary {
    /// `t,lo,hi` rows for plotting.
    pub fn band_csv(band: &[BandPoint]) -> String {
        let mut out = String::from("t,lo,hi\n");
        for b in band {
            out.push_str(&format!("{},{},{}\n", b.t, b.lo, b.hi));
        }
        out
    }
}

/// Empirical quantile with plotting positions `(i - 0.5) / B`, linearly
/// interpolated and clamped to the sample extremes.
pub fn percentile(sorted: &[f64], prob: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("percentile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidArgument(format!("probability {prob} outside [0, 1]")));
    }
    let b = sorted.len();
    // 1-based fractional index solving (i - 0.5) / B = prob
    let pos = prob * b as f64 + 0.5;
    if pos <= 1.0 {
        return Ok(sorted[0]);
    }
    if pos >= b as f64 {
        return Ok(sorted[b - 1]);
    }
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]))
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Fits `method` on `data` using its own grid.
pub fn fit_method<T: Scalar>(data: &TwoSampleData<T>, method: Method, em: &EmConfig) -> Result<MixtureEstimate<T>> {
    let grid = EvalGrid::build(data, T::of(em.q))?;
    match method {
        Method::BinomialPlugin => plugin_estimate(data, &grid),
        Method::EmpiricalLikelihood => empirical_likelihood_estimate(data, &grid),
        Method::MmlEm => fit_mml_on_grid(data, &grid, em),
    }
}

fn resample<T: Scalar, R: Rng>(sample: &ZeroInflatedSample<T>, rng: &mut R) -> Result<ZeroInflatedSample<T>> {
    let values = sample.values();
    let drawn: Vec<T> = (0..values.len())
        .map(|_| values[rng.random_range(0..values.len())])
        .collect();
    ZeroInflatedSample::from_values(&drawn)
}

/// Bootstrap replicate `index`: X and Y resampled separately with their sizes fixed.
pub fn resample_data<T: Scalar>(data: &TwoSampleData<T>, seed: u64, index: usize) -> Result<TwoSampleData<T>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let x = resample(data.x(), &mut rng)?;
    let y = resample(data.y(), &mut rng)?;
    TwoSampleData::new(x, y)
}

struct Replicate {
    lambda: f64,
    p: f64,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

fn monotone_band(values: Vec<f64>) -> Vec<f64> {
    let seq = WeightedSequence::uniform(values).expect("nonempty band");
    pava(&seq).into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// Runs the bootstrap for one estimator.
///
/// Each replicate is refitted on its own grid; replicate CDFs are read off the
/// original grid by right-continuous step interpolation before the pointwise
/// percentiles are taken. Replicate `b` draws from stream `b` of `seed`, so the
/// result does not depend on how replicates are scheduled.
pub fn bootstrap<T: Scalar>(
    data: &TwoSampleData<T>,
    method: Method,
    config: &BootstrapConfig,
) -> Result<BootstrapSummary> {
    if config.n_boot < 2 {
        return Err(Error::InvalidArgument("n_boot must be >= 2".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must lie in (0, 1), got {}",
            config.level
        )));
    }
    config.em.validate()?;
    let point = fit_method(data, method, &config.em)?;
    let grid_points = point.points.clone();

    let reps: Vec<Option<Replicate>> = (0..config.n_boot)
        .into_par_iter()
        .map(|b| {
            let sample = resample_data(data, config.seed, b).ok()?;
            let em = EmConfig {
                rng_seed: config.em.rng_seed.wrapping_add(b as u64),
                ..config.em
            };
            let est = fit_method(&sample, method, &em).ok()?;
            let on_grid = |c: &crate::sample::GridCdf<T>| -> Vec<f64> {
                c.resample(&est.points, &grid_points)
                    .values()
                    .iter()
                    .map(|v| v.to_f64_lossy())
                    .collect()
            };
            Some(Replicate {
                lambda: est.lambda.to_f64_lossy(),
                p: est.p.to_f64_lossy(),
                f1: on_grid(&est.f1),
                f2: on_grid(&est.f2),
            })
        })
        .collect();
    let reps: Vec<Replicate> = reps.into_iter().flatten().collect();
    let used = reps.len();
    let dropped = config.n_boot - used;
    if used < 2 {
        return Err(Error::Degenerate(format!(
            "only {used} of {} bootstrap replicates were usable",
            config.n_boot
        )));
    }

    let alpha = (1.0 - config.level) / 2.0;
    let interval = |mut v: Vec<f64>| -> Result<(f64, f64)> {
        v.sort_by(|a, b| a.total_cmp(b));
        Ok((percentile(&v, alpha)?, percentile(&v, 1.0 - alpha)?))
    };
    let lambdas: Vec<f64> = reps.iter().map(|r| r.lambda).collect();
    let ps: Vec<f64> = reps.iter().map(|r| r.p).collect();

    let band = |get: fn(&Replicate) -> &Vec<f64>| -> Result<Vec<BandPoint>> {
        let mut lo = Vec::with_capacity(grid_points.len());
        let mut hi = Vec::with_capacity(grid_points.len());
        for h in 0..grid_points.len() {
            let (l, u) = interval(reps.iter().map(|r| get(r)[h]).collect())?;
            lo.push(l);
            hi.push(u);
        }
        let (lo, hi) = (monotone_band(lo), monotone_band(hi));
        Ok(grid_points
            .iter()
            .zip(lo.into_iter().zip(hi))
            .map(|(t, (lo, hi))| BandPoint {
                t: t.to_f64_lossy(),
                lo,
                hi,
            })
            .collect())
    };

    Ok(BootstrapSummary {
        method,
        n_boot: config.n_boot,
        used,
        dropped,
        flagged: dropped as f64 > MAX_DROP_RATE * config.n_boot as f64,
        level: config.level,
        lambda: point.lambda.to_f64_lossy(),
        p: point.p.to_f64_lossy(),
        se_lambda: sample_sd(&lambdas),
        se_p: sample_sd(&ps),
        ci_lambda: interval(lambdas)?,
        ci_p: interval(ps)?,
        band_f1: band(|r| &r.f1)?,
        band_f2: band(|r| &r.f2)?,
    })
}
