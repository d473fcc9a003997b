//! EM iterations for the maximum multinomial likelihood estimator.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::{binomial_estimate, plugin_f2_raw};
use crate::error::{Error, Result};
use crate::estimate::{lambda_star, Flag, Method, MixtureEstimate};
use crate::isotonic::{project_unit_monotone, running_max};
use crate::sample::{empirical_positive_cdf, EvalGrid, GridCdf, TwoSampleData};
use crate::scalar::Scalar;

use super::counts::GridCounts;
use super::likelihood::loglik_values;

/// Largest tolerated likelihood decrease between EM iterations.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub q: f64,
    /// Stop once the absolute log-likelihood increment is at most this.
    pub tol: f64,
    pub max_iters: usize,
    pub n_starts: usize,
    pub rng_seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            q: 0.001,
            tol: 1e-6,
            max_iters: 1000,
            n_starts: 6,
            rng_seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "q must lie in (0, 0.5), got {}",
                self.q
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        if self.max_iters == 0 || self.n_starts == 0 {
            return Err(Error::InvalidArgument("max_iters and n_starts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameter values after some number of EM iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmState<T> {
    pub lambda: T,
    pub p: T,
    pub lambda_star: T,
    pub f1: GridCdf<T>,
    pub f2: GridCdf<T>,
    pub loglik: T,
    pub iteration: usize,
}

impl<T: Scalar> EmState<T> {
    pub fn new(lambda: T, p: T, f1: GridCdf<T>, f2: GridCdf<T>, counts: &GridCounts<T>, grid: &EvalGrid<T>) -> Self {
        let loglik = loglik_values(lambda, p, f1.values(), f2.values(), counts, grid);
        Self {
            lambda,
            p,
            lambda_star: lambda_star(lambda, p),
            f1,
            f2,
            loglik,
            iteration: 0,
        }
    }
}

/// Posterior membership weights at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EStepWeights<T> {
    /// Probability that an indicator `Y <= t_h` came from the second component.
    pub a: Vec<T>,
    /// Same for `Y > t_h`.
    pub b: Vec<T>,
}

fn share<T: Scalar>(ls: T, second: T, first: T) -> T {
    let num = ls * second;
    let den = num + (T::one() - ls) * first;
    if den > T::zero() {
        (num / den).min(T::one())
    } else {
        ls
    }
}

pub fn e_step<T: Scalar>(state: &EmState<T>, grid: &EvalGrid<T>) -> EStepWeights<T> {
    let ls = state.lambda_star;
    let one = T::one();
    let (f1, f2) = (state.f1.values(), state.f2.values());
    let mut a = Vec::with_capacity(grid.k());
    let mut b = Vec::with_capacity(grid.k());
    for h in 0..grid.k() {
        a.push(share(ls, f2[h], f1[h]));
        b.push(share(ls, one - f2[h], one - f1[h]));
    }
    EStepWeights { a, b }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MStepOutcome<T> {
    pub state: EmState<T>,
    /// All F2 weights vanished, so F2 was carried over unchanged.
    pub f2_vanished: bool,
}

/// Writes a trimmed-range fit back onto the full grid.
///
/// Points below the range hold the first fitted value and points above it are 1.
fn extend_trimmed<T: Scalar>(fit: &[T], grid: &EvalGrid<T>) -> GridCdf<T> {
    let range = grid.trimmed();
    let mut out = Vec::with_capacity(grid.k());
    out.extend(std::iter::repeat_n(fit[0], range.start));
    out.extend_from_slice(fit);
    out.extend(std::iter::repeat_n(T::one(), grid.k() - range.end));
    GridCdf::from_trusted(running_max(out))
}

pub fn m_step<T: Scalar>(
    weights: &EStepWeights<T>,
    counts: &GridCounts<T>,
    grid: &EvalGrid<T>,
    prev: &EmState<T>,
) -> MStepOutcome<T> {
    let one = T::one();
    let range = grid.trimmed();
    let n = T::of_count(counts.n());
    let k_q = T::of_count(grid.k_q());
    let m_plus = T::of_count(counts.m_plus);

    let len = range.len();
    let mut t1 = Vec::with_capacity(len);
    let mut w1 = Vec::with_capacity(len);
    let mut t2 = Vec::with_capacity(len);
    let mut w2 = Vec::with_capacity(len);
    let mut second = T::zero();
    for h in range.clone() {
        let (a, b) = (weights.a[h], weights.b[h]);
        let (n1, n2) = (counts.n1[h], counts.n2[h]);
        let lo2 = n1 * a;
        let hi2 = n2 * b;
        second = second + lo2 + hi2;
        let lo1 = counts.m1[h] + n1 * (one - a);
        let wt1 = m_plus + n1 * (one - a) + n2 * (one - b);
        t1.push(lo1 / wt1);
        w1.push(wt1);
        let wt2 = lo2 + hi2;
        t2.push(if wt2 > T::zero() { lo2 / wt2 } else { T::zero() });
        w2.push(wt2);
    }

    let lambda = (second / (k_q * n)).min(one);
    let denom = (T::of_count(counts.m() + counts.n()) - n * lambda).max(T::of(1e-12));
    let p = (T::of_count(counts.m0 + counts.n0) / denom).min(one);

    let f1 = extend_trimmed(
        &project_unit_monotone(&t1, Some(&w1)).expect("F1 weights are positive"),
        grid,
    );
    let (f2, f2_vanished) = match project_unit_monotone(&t2, Some(&w2)) {
        Ok(fit) => (extend_trimmed(&fit, grid), false),
        Err(_) => (prev.f2.clone(), true),
    };

    let loglik = loglik_values(lambda, p, f1.values(), f2.values(), counts, grid);
    MStepOutcome {
        state: EmState {
            lambda,
            p,
            lambda_star: lambda_star(lambda, p),
            f1,
            f2,
            loglik,
            iteration: prev.iteration + 1,
        },
        f2_vanished,
    }
}

/// One line of the per-iteration diagnostic trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub start: usize,
    pub iteration: usize,
    pub loglik: f64,
    pub lambda: f64,
    pub p: f64,
}

impl TraceRecord {
    fn of<T: Scalar>(start: usize, s: &EmState<T>) -> Self {
        Self {
            start,
            iteration: s.iteration,
            loglik: s.loglik.to_f64_lossy(),
            lambda: s.lambda.to_f64_lossy(),
            p: s.p.to_f64_lossy(),
        }
    }
}

/// Writes trace records as line-delimited JSON.
pub fn write_trace<W: Write>(mut out: W, trace: &[TraceRecord]) -> Result<()> {
    for rec in trace {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Result of iterating EM from one starting point.
#[derive(Debug, Clone)]
pub struct EmRun<T> {
    pub state: EmState<T>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub f2_vanished: bool,
}

/// Iterates E and M steps until the likelihood increment is at most `tol`.
pub fn run_em<T: Scalar>(
    start: EmState<T>,
    counts: &GridCounts<T>,
    grid: &EvalGrid<T>,
    config: &EmConfig,
    start_index: usize,
) -> EmRun<T> {
    let tol = T::of(config.tol);
    let mut trace = vec![TraceRecord::of(start_index, &start)];
    let mut state = start;
    let mut converged = false;
    let mut f2_vanished = false;
    for _ in 0..config.max_iters {
        let weights = e_step(&state, grid);
        let next = m_step(&weights, counts, grid, &state);
        f2_vanished |= next.f2_vanished;
        let increment = next.state.loglik - state.loglik;
        debug_assert!(
            increment.to_f64_lossy() >= -MONOTONE_SLACK * (1.0 + state.loglik.abs().to_f64_lossy() * 1e-3),
            "EM decreased the likelihood by {increment} at iteration {}",
            next.state.iteration
        );
        state = next.state;
        trace.push(TraceRecord::of(start_index, &state));
        if increment <= tol {
            converged = true;
            break;
        }
    }
    EmRun {
        state,
        trace,
        converged,
        f2_vanished,
    }
}

const START_MIN: f64 = 0.01;
const START_MAX: f64 = 0.99;
const START_JITTER: f64 = 0.15;
const START_BLEND: f64 = 0.3;

fn clamp_start<T: Scalar>(v: T) -> T {
    v.max(T::of(START_MIN)).min(T::of(START_MAX))
}

/// Starting points: the plug-in estimate first, then random perturbations of it.
///
/// If the plug-in `F2` is not identified (binomial `lambda* = 0`) the empirical
/// CDF of the positive Y values stands in for it.
pub fn initial_states<T: Scalar>(
    data: &TwoSampleData<T>,
    grid: &EvalGrid<T>,
    counts: &GridCounts<T>,
    config: &EmConfig,
) -> Result<Vec<EmState<T>>> {
    if data.m0() == 0 || data.m_plus() == 0 || data.n_plus() == 0 {
        return Err(Error::Degenerate(format!(
            "MML needs m0, m+ and n+ > 0 (got m0={}, m+={}, n+={})",
            data.m0(),
            data.m_plus(),
            data.n_plus()
        )));
    }
    let bin = binomial_estimate(data)?;
    let f1 = empirical_positive_cdf(data.x(), grid)?;
    let f_y = empirical_positive_cdf(data.y(), grid)?;
    let ls = bin.lambda_star();
    let f2 = if ls > T::zero() {
        GridCdf::from_trusted(project_unit_monotone(
            &plugin_f2_raw(f_y.values(), f1.values(), ls),
            None,
        )?)
    } else {
        f_y
    };
    let (lambda0, p0) = (clamp_start(bin.lambda), clamp_start(bin.p));

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut states = Vec::with_capacity(config.n_starts);
    states.push(EmState::new(lambda0, p0, f1.clone(), f2.clone(), counts, grid));
    for _ in 1..config.n_starts {
        let dl = T::of(rng.random_range(-START_JITTER..=START_JITTER));
        let dp = T::of(rng.random_range(-START_JITTER..=START_JITTER));
        let w = T::of(rng.random_range(0.0..=START_BLEND));
        states.push(EmState::new(
            clamp_start(lambda0 + dl),
            clamp_start(p0 + dp),
            f1.blend(&f2, w),
            f2.blend(&f1, w),
            counts,
            grid,
        ));
    }
    Ok(states)
}

/// Outcome of a multi-start fit, including every run.
#[derive(Debug, Clone)]
pub struct MmlFit<T> {
    pub estimate: MixtureEstimate<T>,
    pub runs: Vec<EmRun<T>>,
    pub best_start: usize,
}

/// Multi-start EM on a prebuilt grid; keeps the run with the largest likelihood
/// (lowest start index on ties).
pub fn fit_mml_detailed<T: Scalar>(
    data: &TwoSampleData<T>,
    grid: &EvalGrid<T>,
    config: &EmConfig,
) -> Result<MmlFit<T>> {
    config.validate()?;
    let counts = GridCounts::new(data, grid);
    let starts = initial_states(data, grid, &counts, config)?;
    let runs: Vec<EmRun<T>> = starts
        .into_iter()
        .enumerate()
        .map(|(i, s)| run_em(s, &counts, grid, config, i))
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate().skip(1) {
        if run.state.loglik > runs[best].state.loglik {
            best = i;
        }
    }
    let run = &runs[best];
    let s = &run.state;
    let mut estimate = MixtureEstimate::new(s.lambda, s.p, grid, s.f1.clone(), s.f2.clone(), Method::MmlEm);
    estimate.loglik = Some(s.loglik);
    estimate.iterations = Some(s.iteration);
    if !run.converged {
        estimate.push_flag(Flag::NotConverged);
    }
    if run.f2_vanished {
        estimate.push_flag(Flag::F2WeightsVanished);
    }
    Ok(MmlFit {
        estimate,
        runs,
        best_start: best,
    })
}

/// Maximum multinomial likelihood estimate of `(lambda, p, F1, F2)`.
pub fn fit_mml<T: Scalar>(data: &TwoSampleData<T>, config: &EmConfig) -> Result<MixtureEstimate<T>> {
    let grid = EvalGrid::build(data, T::of(config.q))?;
    fit_mml_on_grid(data, &grid, config)
}

pub fn fit_mml_on_grid<T: Scalar>(
    data: &TwoSampleData<T>,
    grid: &EvalGrid<T>,
    config: &EmConfig,
) -> Result<MixtureEstimate<T>> {
    Ok(fit_mml_detailed(data, grid, config)?.estimate)
}
