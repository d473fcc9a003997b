//! The multinomial log-likelihood over the trimmed grid.

use crate::error::{Error, Result};
use crate::estimate::{lambda_star, MixtureEstimate};
use crate::sample::EvalGrid;
use crate::scalar::{xlogy, KahanSum, Scalar};

use super::counts::GridCounts;

/// `J(x, y) = x ln y + (1 - x) ln(1 - y)` with `0 ln 0 = 0`.
pub fn j_fn<T: Scalar>(x: T, y: T) -> T {
    xlogy(x, y) + xlogy(T::one() - x, T::one() - y)
}

/// Log-likelihood at `(lambda, p, F1, F2)` given values of `F1`, `F2` on the full grid.
///
/// Only trimmed grid points contribute. Probabilities inside logarithms are
/// floored at [`Scalar::log_floor`], so a zero probability with a positive count
/// yields a large finite penalty instead of `-inf`.
pub fn loglik_values<T: Scalar>(lambda: T, p: T, f1: &[T], f2: &[T], counts: &GridCounts<T>, grid: &EvalGrid<T>) -> T {
    let one = T::one();
    let ls = lambda_star(lambda, p);
    let zero_y = (one - lambda) * p;
    let k_q = T::of_count(grid.k_q());
    let mut acc = KahanSum::new();
    acc.add(
        k_q * (xlogy(T::of_count(counts.m0), p)
            + xlogy(T::of_count(counts.m_plus), one - p)
            + xlogy(T::of_count(counts.n0), zero_y)
            + xlogy(T::of_count(counts.n_plus), one - zero_y)),
    );
    for h in grid.trimmed() {
        let (a, b) = (f1[h], f2[h]);
        let fy = (one - ls) * a + ls * b;
        let sy = (one - ls) * (one - a) + ls * (one - b);
        acc.add(xlogy(counts.m1[h], a));
        acc.add(xlogy(counts.m2[h], one - a));
        acc.add(xlogy(counts.n1[h], fy));
        acc.add(xlogy(counts.n2[h], sy));
    }
    acc.value()
}

/// Multinomial log-likelihood of an estimate.
pub fn multinomial_loglik<T: Scalar>(
    est: &MixtureEstimate<T>,
    counts: &GridCounts<T>,
    grid: &EvalGrid<T>,
) -> Result<T> {
    if est.points.as_slice() != grid.points() || counts.len() != grid.k() {
        return Err(Error::LengthMismatch {
            expected: grid.k(),
            got: est.points.len(),
        });
    }
    Ok(loglik_values(
        est.lambda,
        est.p,
        est.f1.values(),
        est.f2.values(),
        counts,
        grid,
    ))
}
