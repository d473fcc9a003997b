//! Monte Carlo harness: simulate scenarios, run estimators, summarize errors.

mod config;
mod family;
mod report;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{binomial_estimate, empirical_likelihood_estimate, plugin_estimate};
use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::mml::{fit_mml_on_grid, EmConfig};
use crate::sample::{empirical_positive_cdf, EvalGrid, GridCdf, TwoSampleData, ZeroInflatedSample};
use crate::scalar::Scalar;

pub use config::SimConfig;
pub use family::Family;
pub use report::{CellReport, MethodSummary, SimulationReport};

/// One cell of a simulation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub f1: Family,
    pub f2: Family,
    pub lambda: f64,
    pub p: f64,
    pub m: usize,
    pub n: usize,
    pub n_reps: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    /// `F1 = LN(0, 1)`, `F2 = LN(2, 1)`.
    pub fn scenario1(lambda: f64, p: f64, m: usize, n: usize, n_reps: usize, seed: u64) -> Self {
        Self {
            f1: Family::lognormal(0.0, 1.0),
            f2: Family::lognormal(2.0, 1.0),
            lambda,
            p,
            m,
            n,
            n_reps,
            seed,
        }
    }

    /// `F1 = GAM(1, 1)`, `F2 = GAM(4, 3)`.
    pub fn scenario2(lambda: f64, p: f64, m: usize, n: usize, n_reps: usize, seed: u64) -> Self {
        Self {
            f1: Family::gamma(1.0, 1.0),
            f2: Family::gamma(4.0, 3.0),
            lambda,
            p,
            m,
            n,
            n_reps,
            seed,
        }
    }

    /// Interior-parameter check used by the Monte Carlo runner.
    pub fn validate(&self) -> Result<()> {
        self.f1.validate()?;
        self.f2.validate()?;
        let interior = |v: f64| v > 0.0 && v < 1.0;
        if !interior(self.lambda) || !interior(self.p) {
            return Err(Error::InvalidArgument(format!(
                "lambda and p must lie in (0, 1), got ({}, {})",
                self.lambda, self.p
            )));
        }
        if self.m < 2 || self.n < 2 || self.n_reps == 0 {
            return Err(Error::InvalidArgument("need m, n >= 2 and n_reps >= 1".into()));
        }
        Ok(())
    }

    /// Stable key mixing the cell parameters, so equal seeds still give
    /// independent streams across cells.
    pub fn cell_key(&self) -> u64 {
        const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
        let fam = |f: &Family| match *f {
            Family::LogNormal { mean_log, var_log } => [1.0, mean_log, var_log],
            Family::Gamma { shape, scale } => [2.0, shape, scale],
        };
        let mut words: Vec<u64> = Vec::new();
        words.extend(fam(&self.f1).iter().map(|v| v.to_bits()));
        words.extend(fam(&self.f2).iter().map(|v| v.to_bits()));
        words.extend([self.lambda.to_bits(), self.p.to_bits(), self.m as u64, self.n as u64]);
        let mut h = FNV_OFFSET;
        for w in words {
            for byte in w.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(FNV_PRIME);
            }
        }
        h
    }

    /// Random stream for replication `rep`, independent of execution order.
    pub fn rng_for(&self, rep: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ self.cell_key());
        rng.set_stream(rep as u64);
        rng
    }
}

/// Draws one replication of the two-sample design.
pub fn simulate_dataset<T: Scalar>(spec: &ScenarioSpec, rep: usize) -> Result<TwoSampleData<T>> {
    spec.f1.validate()?;
    spec.f2.validate()?;
    let mut rng = spec.rng_for(rep);
    let (lambda, p) = (spec.lambda, spec.p);
    let mut xs = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let v = if rng.random::<f64>() < p {
            0.0
        } else {
            spec.f1.sample(&mut rng)
        };
        xs.push(T::of(v));
    }
    let mut ys = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let u: f64 = rng.random();
        let v = if u < (1.0 - lambda) * p {
            0.0
        } else if u < 1.0 - lambda {
            spec.f1.sample(&mut rng)
        } else {
            spec.f2.sample(&mut rng)
        };
        ys.push(T::of(v));
    }
    TwoSampleData::new(
        ZeroInflatedSample::from_values(&xs)?,
        ZeroInflatedSample::from_values(&ys)?,
    )
}

/// Sup-distance between a step CDF on `points` and a continuous CDF.
///
/// Checks the right value and the left limit at each jump, plus the tails.
pub fn ks_distance<T: Scalar>(cdf: &GridCdf<T>, points: &[T], truth: impl Fn(f64) -> f64) -> f64 {
    let mut sup: f64 = 0.0;
    let mut left = 0.0;
    for (&t, &v) in points.iter().zip(cdf.values()) {
        let f = truth(t.to_f64_lossy());
        let v = v.to_f64_lossy();
        sup = sup.max((v - f).abs()).max((left - f).abs());
        left = v;
    }
    sup.max((1.0 - left).abs())
}

/// Per-replication errors of one estimator; `None` marks a degenerate fit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RepErrors {
    pub sq_lambda: Option<f64>,
    pub sq_p: Option<f64>,
    pub ks_f1: Option<f64>,
    pub ks_f2: Option<f64>,
    /// `F2` was not identified (plug-in with `lambda* = 0`) and `ks_f2` holds
    /// the maximal distance 1 rather than a fitted value.
    pub f2_unidentified: bool,
}

/// Seed for the multi-start EM in replication `rep`.
pub fn em_seed(spec: &ScenarioSpec, rep: usize) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(!(spec.seed ^ spec.cell_key()));
    rng.set_stream(rep as u64);
    rng.random()
}

/// Runs one estimator on one dataset and scores it against the truth.
pub fn score_replication<T: Scalar>(
    spec: &ScenarioSpec,
    data: &TwoSampleData<T>,
    method: Method,
    em: &EmConfig,
) -> RepErrors {
    let grid = match EvalGrid::build(data, T::of(em.q)) {
        Ok(g) => g,
        Err(_) => return RepErrors::default(),
    };
    let points = grid.points();
    let sq = |v: T, truth: f64| {
        let d = v.to_f64_lossy() - truth;
        d * d
    };
    let ks1 = |c: &GridCdf<T>| ks_distance(c, points, |x| spec.f1.cdf(x));
    let ks2 = |c: &GridCdf<T>| ks_distance(c, points, |x| spec.f2.cdf(x));
    match method {
        Method::BinomialPlugin => {
            let mut out = RepErrors::default();
            if let Ok(b) = binomial_estimate(data) {
                out.sq_lambda = Some(sq(b.lambda, spec.lambda));
                out.sq_p = Some(sq(b.p, spec.p));
            }
            if let Ok(f1) = empirical_positive_cdf(data.x(), &grid) {
                out.ks_f1 = Some(ks1(&f1));
            }
            match plugin_estimate(data, &grid) {
                Ok(est) => out.ks_f2 = Some(ks2(&est.f2)),
                // lambda* = 0 leaves F2 without any estimate; the replication
                // still counts, at the largest distance a CDF can have
                Err(_) if out.sq_lambda.is_some() => {
                    out.ks_f2 = Some(1.0);
                    out.f2_unidentified = true;
                }
                Err(_) => {}
            }
            out
        }
        Method::EmpiricalLikelihood | Method::MmlEm => {
            let est = if method == Method::MmlEm {
                fit_mml_on_grid(data, &grid, em)
            } else {
                empirical_likelihood_estimate(data, &grid)
            };
            match est {
                Ok(est) => RepErrors {
                    sq_lambda: Some(sq(est.lambda, spec.lambda)),
                    sq_p: Some(sq(est.p, spec.p)),
                    ks_f1: Some(ks1(&est.f1)),
                    ks_f2: Some(ks2(&est.f2)),
                    f2_unidentified: false,
                },
                Err(_) => RepErrors::default(),
            }
        }
    }
}

/// Runs every cell with every estimator and averages over replications.
///
/// Replications run on the rayon pool; results are collected in replication
/// order before summing, so reports are bit-identical across thread counts.
pub fn run_cells<T: Scalar>(specs: &[ScenarioSpec], methods: &[Method], em: &EmConfig) -> Result<SimulationReport> {
    em.validate()?;
    let started = Instant::now();
    let mut cells = Vec::with_capacity(specs.len());
    for spec in specs {
        spec.validate()?;
        let per_rep: Vec<Vec<RepErrors>> = (0..spec.n_reps)
            .into_par_iter()
            .map(|rep| {
                let data = simulate_dataset::<T>(spec, rep);
                let em = EmConfig {
                    rng_seed: em_seed(spec, rep),
                    ..*em
                };
                methods
                    .iter()
                    .map(|&m| match &data {
                        Ok(d) => score_replication(spec, d, m, &em),
                        Err(_) => RepErrors::default(),
                    })
                    .collect()
            })
            .collect();
        let metrics = methods
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, MethodSummary::from_reps(per_rep.iter().map(|r| r[i]))))
            .collect();
        cells.push(CellReport {
            spec: spec.clone(),
            metrics,
        });
    }
    Ok(SimulationReport {
        cells,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_design_gives_all_zeros() {
        let spec = ScenarioSpec::scenario1(0.0, 1.0, 20, 30, 1, 9);
        let d = simulate_dataset::<f64>(&spec, 0).unwrap();
        assert_eq!((d.m0(), d.n0()), (20, 30));
    }

    #[test]
    fn y_zero_fraction_concentrates() {
        let spec = ScenarioSpec::scenario1(0.3, 0.6, 2, 100_000, 1, 11);
        let d = simulate_dataset::<f64>(&spec, 0).unwrap();
        let expected = (1.0 - 0.3) * 0.6;
        let se = (expected * (1.0 - expected) / 100_000.0_f64).sqrt();
        let frac = d.n0() as f64 / 100_000.0;
        assert!((frac - expected).abs() < 3.0 * se, "{frac} vs {expected}");
    }

    #[test]
    fn datasets_are_reproducible_and_distinct() {
        let spec = ScenarioSpec::scenario2(0.5, 0.5, 50, 50, 3, 4);
        let a = simulate_dataset::<f64>(&spec, 1).unwrap();
        let b = simulate_dataset::<f64>(&spec, 1).unwrap();
        let c = simulate_dataset::<f64>(&spec, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ks_examples() {
        let f = Family::lognormal(0.0, 1.0);
        let points = [0.5, 1.0, 2.0];
        let exact = GridCdf::new(points.iter().map(|&t| f.cdf(t)).collect()).unwrap();
        let d = ks_distance(&exact, &points, |x| f.cdf(x));
        // right values agree, so only the left limits at each jump and the upper tail remain
        let truth: Vec<f64> = points.iter().map(|&t| f.cdf(t)).collect();
        let expected = truth[0]
            .max(truth[1] - truth[0])
            .max(truth[2] - truth[1])
            .max(1.0 - truth[2]);
        assert!((d - expected).abs() < 1e-15);

        let one_jump = GridCdf::new(vec![1.0]).unwrap();
        let d = ks_distance(&one_jump, &[1.0], |x| f.cdf(x));
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_matches_dense_grid() {
        let f = Family::gamma(1.0, 1.0);
        let points = [0.1, 0.4, 0.7, 1.5, 2.2, 3.0];
        let cdf = GridCdf::new(vec![0.05, 0.3, 0.45, 0.8, 0.85, 0.9]).unwrap();
        let ks = ks_distance(&cdf, &points, |x| f.cdf(x));
        let mut dense: f64 = 0.0;
        for i in 0..100_000 {
            let x = 20.0 * i as f64 / 100_000.0;
            dense = dense.max((cdf.eval(&points, x) - f.cdf(x)).abs());
        }
        assert!((ks - dense).abs() < 1e-3, "{ks} vs {dense}");
        assert!(ks >= dense - 1e-12);
    }
}
