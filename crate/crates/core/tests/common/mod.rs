//! Independent reference computations shared by the oracle and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zimix::baseline::empirical_likelihood_estimate;
use zimix::isotonic::{pava, WeightedSequence};
use zimix::mml::{fit_mml_detailed, initial_states, j_fn, loglik_values, run_em, EmConfig, GridCounts};
use zimix::sample::{EvalGrid, TwoSampleData};
use zimix::Method;

/// Log with `ln 0 = -inf`, `0 ln 0 = 0`.
fn term(count: f64, prob: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * prob.ln()
    }
}

/// Multinomial log-likelihood summed observation by observation:
/// for each trimmed grid point, every X and every Y contributes the log
/// probability of its cell (zero, positive and `<= t`, positive and `> t`).
///
/// `f1`, `f2` are the CDF values at the grid points.
#[allow(clippy::too_many_arguments)]
pub fn triple_sum_loglik(
    x: &[f64],
    y: &[f64],
    grid: &[f64],
    trimmed: std::ops::Range<usize>,
    lambda: f64,
    p: f64,
    f1: &[f64],
    f2: &[f64],
) -> f64 {
    let mut total = 0.0;
    for h in trimmed {
        let t = grid[h];
        for &xi in x {
            let prob = if xi == 0.0 {
                p
            } else if xi <= t {
                (1.0 - p) * f1[h]
            } else {
                (1.0 - p) * (1.0 - f1[h])
            };
            total += term(1.0, prob);
        }
        for &yj in y {
            let prob = if yj == 0.0 {
                (1.0 - lambda) * p
            } else if yj <= t {
                (1.0 - lambda) * (1.0 - p) * f1[h] + lambda * f2[h]
            } else {
                (1.0 - lambda) * (1.0 - p) * (1.0 - f1[h]) + lambda * (1.0 - f2[h])
            };
            total += term(1.0, prob);
        }
    }
    total
}

/// Exact minimum of `sum w_i (y_i - v_i)^2` over nondecreasing `v` drawn from
/// `candidates` (sorted), by dynamic programming over candidate indices.
pub fn monotone_dp_min(targets: &[f64], weights: &[f64], candidates: &[f64]) -> f64 {
    let c = candidates.len();
    let mut best = vec![0.0f64; c];
    for (i, (&y, &w)) in targets.iter().zip(weights).enumerate() {
        let mut running = f64::INFINITY;
        for j in 0..c {
            let prev = if i == 0 { 0.0 } else { best[j] };
            running = running.min(prev);
            let d = y - candidates[j];
            best[j] = running + w * d * d;
        }
    }
    best.into_iter().fold(f64::INFINITY, f64::min)
}

/// Candidate values containing every optimal isotonic solution: all weighted
/// means of contiguous segments, plus a 0.05 lattice on the target range.
pub fn pava_candidates(targets: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = targets.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (mut ws, mut wy) = (0.0, 0.0);
        for j in i..n {
            ws += weights[j];
            wy += weights[j] * targets[j];
            if ws > 0.0 {
                out.push(wy / ws);
            }
        }
    }
    let lo = targets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut v = (lo / 0.05).floor() * 0.05;
    while v <= hi + 0.05 {
        out.push(v);
        v += 0.05;
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

/// Reduced empirical log-likelihood with equal masses `a` on X positives and
/// `a* = (1 - m+ a) / n+` on Y positives, and `1 / n+` for every `b_j`.
pub fn reduced_el(m0: f64, m_plus: f64, n0: f64, n_plus: f64, lambda: f64, p: f64, a: f64) -> f64 {
    let a_star = (1.0 - m_plus * a) / n_plus;
    term(m0, p)
        + term(m_plus, 1.0 - p)
        + term(m_plus, a)
        + term(n0, 1.0 - lambda)
        + term(n0, p)
        + term(n_plus, (1.0 - lambda) * (1.0 - p) * a_star + lambda / n_plus)
}

/// Full empirical log-likelihood with explicit masses.
pub fn full_el(m0: usize, n0: usize, lambda: f64, p: f64, a_x: &[f64], a_y: &[f64], b: &[f64]) -> f64 {
    let mut v = term(m0 as f64, p) + term(n0 as f64, (1.0 - lambda) * p);
    for &a in a_x {
        v += ((1.0 - p) * a).ln();
    }
    for (&a, &bj) in a_y.iter().zip(b) {
        v += ((1.0 - lambda) * (1.0 - p) * a + lambda * bj).ln();
    }
    v
}

/// Grid maximum of [`reduced_el`] over `lambda, p` in steps of 0.01 and
/// `a = s / m+` for `s` in steps of 0.01.
pub fn el_grid_max(m0: usize, m_plus: usize, n0: usize, n_plus: usize) -> f64 {
    let (m0, mp, n0, np) = (m0 as f64, m_plus as f64, n0 as f64, n_plus as f64);
    let mut best = f64::NEG_INFINITY;
    for il in 0..=100 {
        let l = il as f64 / 100.0;
        for ip in 0..=100 {
            let p = ip as f64 / 100.0;
            for is in 0..=100 {
                let a = is as f64 / 100.0 / mp;
                best = best.max(reduced_el(m0, mp, n0, np, l, p, a));
            }
        }
    }
    best
}

/// Lattice maximum of the multinomial likelihood on a two-point grid: `lambda, p`
/// in steps of 0.05 and every monotone pair of CDF values on the 0.05 lattice.
pub fn mml_lattice_max_k2(data: &TwoSampleData<f64>, grid: &EvalGrid<f64>, counts: &GridCounts<f64>) -> f64 {
    assert_eq!(grid.k(), 2);
    let lat: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let mut pairs = Vec::new();
    for i in 0..=20 {
        for j in i..=20 {
            pairs.push([lat[i], lat[j]]);
        }
    }
    let m_plus = data.m_plus() as f64;
    let n_plus = data.n_plus() as f64;
    let k_q = grid.k_q() as f64;
    let range = grid.trimmed();
    let mut best = f64::NEG_INFINITY;
    for &lambda in &lat {
        for &p in &lat {
            let zy = (1.0 - lambda) * p;
            let base = k_q
                * (term(data.m0() as f64, p)
                    + term(m_plus, 1.0 - p)
                    + term(data.n0() as f64, zy)
                    + term(n_plus, 1.0 - zy));
            if base == f64::NEG_INFINITY {
                continue;
            }
            let ls = if zy < 1.0 { lambda / (1.0 - zy) } else { 0.0 };
            // X part depends on F1 only; maximize it jointly with the Y part
            for f1 in &pairs {
                let mut x_part = 0.0;
                for h in range.clone() {
                    x_part += term(counts.m1[h], f1[h]) + term(counts.m2[h], 1.0 - f1[h]);
                }
                if x_part == f64::NEG_INFINITY {
                    continue;
                }
                for f2 in &pairs {
                    let mut y_part = 0.0;
                    for h in range.clone() {
                        let fy = (1.0 - ls) * f1[h] + ls * f2[h];
                        y_part += term(counts.n1[h], fy) + term(counts.n2[h], 1.0 - fy);
                    }
                    best = best.max(base + x_part + y_part);
                }
            }
        }
    }
    best
}

/// Small random dataset with zeros and positives in both groups.
pub fn random_fixture(rng: &mut ChaCha8Rng, max_size: usize) -> TwoSampleData<f64> {
    loop {
        let m = rng.random_range(4..=max_size);
        let n = rng.random_range(4..=max_size);
        let p = rng.random_range(0.1..0.9);
        let lambda = rng.random_range(0.05..0.95);
        let x: Vec<f64> = (0..m)
            .map(|_| {
                if rng.random::<f64>() < p {
                    0.0
                } else {
                    rng.random_range(0.0..2.0f64).exp()
                }
            })
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                if u < (1.0 - lambda) * p {
                    0.0
                } else if u < 1.0 - lambda {
                    rng.random_range(0.0..2.0f64).exp()
                } else {
                    rng.random_range(1.0..3.0f64).exp()
                }
            })
            .collect();
        let d = TwoSampleData::from_values(&x, &y).unwrap();
        if d.m0() > 0 && d.m_plus() > 0 && d.n_plus() > 0 {
            return d;
        }
    }
}

/// Largest likelihood decrease over every iteration of every start, across
/// `runs` random fixtures. Returns (number of runs, worst increment).
pub fn em_monotonicity_sweep(fixtures: usize, seed: u64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = 0;
    let mut worst = f64::INFINITY;
    for i in 0..fixtures {
        let data = random_fixture(&mut rng, 40);
        let config = EmConfig {
            rng_seed: i as u64,
            n_starts: 3,
            tol: 1e-9,
            ..EmConfig::default()
        };
        let grid = EvalGrid::build(&data, config.q).unwrap();
        let counts = GridCounts::new(&data, &grid);
        for (s, start) in initial_states(&data, &grid, &counts, &config)
            .unwrap()
            .into_iter()
            .enumerate()
        {
            let run = run_em(start, &counts, &grid, &config, s);
            runs += 1;
            for w in run.trace.windows(2) {
                worst = worst.min(w[1].loglik - w[0].loglik);
            }
        }
    }
    (runs, worst)
}

/// Checks the fitted likelihood against the lattice optimum on `instances`
/// two-point fixtures; returns the smallest `fit - lattice` margin.
pub fn mml_k2_margin(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut done = 0;
    while done < instances {
        let m0 = rng.random_range(1..6);
        let n0 = rng.random_range(0..6);
        let mut x = vec![0.0; m0];
        let mut y = vec![0.0; n0];
        for _ in 0..rng.random_range(1..6) {
            x.push(if rng.random::<bool>() { 1.0 } else { 2.0 });
        }
        for _ in 0..rng.random_range(1..6) {
            y.push(if rng.random::<bool>() { 1.0 } else { 2.0 });
        }
        let data = TwoSampleData::from_values(&x, &y).unwrap();
        let config = EmConfig::default();
        let grid = EvalGrid::build(&data, config.q).unwrap();
        if grid.k() != 2 {
            continue;
        }
        let counts = GridCounts::new(&data, &grid);
        let fit = fit_mml_detailed(&data, &grid, &config).unwrap();
        let e = &fit.estimate;
        let ll = loglik_values(e.lambda, e.p, e.f1.values(), e.f2.values(), &counts, &grid);
        let lattice = mml_lattice_max_k2(&data, &grid, &counts);
        worst = worst.min(ll - lattice);
        done += 1;
    }
    worst
}

/// PAVA against the exhaustive monotone search on `cases` random instances of
/// length 1..=6 (some zero weights). Returns (cases, worst objective gap).
pub fn pava_worst_gap(cases: usize, seed: u64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for case in 0..cases {
        let n = 1 + case % 6;
        let targets: Vec<f64> = (0..n).map(|_| (rng.random_range(-20..=40) as f64) * 0.05).collect();
        let weights: Vec<f64> = (0..n)
            .map(|i| {
                if i > 0 && rng.random::<f64>() < 0.15 {
                    0.0
                } else {
                    rng.random_range(1..=8) as f64 * 0.25
                }
            })
            .collect();
        let seq = WeightedSequence::new(targets.clone(), weights.clone()).unwrap();
        let fit = pava(&seq);
        if fit.windows(2).any(|w| w[0] > w[1]) {
            return (case, f64::INFINITY);
        }
        let best = monotone_dp_min(&targets, &weights, &pava_candidates(&targets, &weights));
        worst = worst.max(seq.objective(&fit) - best);
    }
    (cases, worst)
}

/// Tiny instances whose sizes put the closed-form estimate on the 0.01
/// search lattice.
pub fn el_instances(count: usize) -> Vec<TwoSampleData<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = Vec::new();
    while out.len() < count {
        let n = [2usize, 4, 5, 10][rng.random_range(0..4)];
        let n0 = rng.random_range(0..n);
        let denom = [5usize, 10, 20][rng.random_range(0..3)];
        if denom <= n0 + 1 {
            continue;
        }
        let m = denom - n0;
        let m0 = rng.random_range(0..m);
        let mut next = 1.0;
        let mut draw = |k: usize| -> Vec<f64> {
            (0..k)
                .map(|_| {
                    next += rng.random_range(0.1..1.0);
                    next
                })
                .collect()
        };
        let mut x = vec![0.0; m0];
        x.extend(draw(m - m0));
        let mut y = vec![0.0; n0];
        y.extend(draw(n - n0));
        out.push(TwoSampleData::from_values(&x, &y).unwrap());
    }
    out
}

/// Closed-form empirical likelihood estimate against the grid-searched
/// maximum. Returns (instances, worst absolute gap).
pub fn el_worst_gap(count: usize) -> (usize, f64) {
    let mut worst: f64 = 0.0;
    let instances = el_instances(count);
    for data in &instances {
        let grid = EvalGrid::build(data, 0.001).unwrap();
        let est = empirical_likelihood_estimate(data, &grid).unwrap();
        assert_eq!(est.method, Method::EmpiricalLikelihood);
        // masses of the fitted CDFs at each observation
        let jumps1 = est.f1.jumps();
        let jumps2 = est.f2.jumps();
        let mass = |jumps: &[f64], t: f64| jumps[grid.points().partition_point(|&g| g < t)];
        let a_x: Vec<f64> = data.x().positives().iter().map(|&t| mass(&jumps1, t)).collect();
        let a_y: Vec<f64> = data.y().positives().iter().map(|&t| mass(&jumps1, t)).collect();
        let b: Vec<f64> = data.y().positives().iter().map(|&t| mass(&jumps2, t)).collect();
        let closed = full_el(data.m0(), data.n0(), est.lambda, est.p, &a_x, &a_y, &b);
        let grid_max = el_grid_max(data.m0(), data.m_plus(), data.n0(), data.n_plus());
        worst = worst.max((closed - grid_max).abs());
    }
    (instances.len(), worst)
}

/// Count of lattice points (step 0.01) where `J(x,x) - J(x,y) < (x-y)^2 / 2`.
/// `y` stays inside (0, 1) where `J(x, y)` is finite.
pub fn quadratic_bound_violations() -> usize {
    let mut violations = 0;
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        for j in 1..100 {
            let y = j as f64 / 100.0;
            if j_fn(x, x) - j_fn(x, y) < 0.5 * (x - y) * (x - y) {
                violations += 1;
            }
        }
    }
    violations
}
