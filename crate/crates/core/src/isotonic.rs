//! Weighted isotonic regression by pool-adjacent-violators.

use crate::error::{Error, Result};
use crate::sample::{EvalGrid, GridCdf};
use crate::scalar::Scalar;

/// Targets with nonnegative weights; at least one weight must be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence<T> {
    targets: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> WeightedSequence<T> {
    pub fn new(targets: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("empty sequence".into()));
        }
        if targets.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: targets.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= T::zero())) {
            return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
        }
        if !weights.iter().any(|w| *w > T::zero()) {
            return Err(Error::InvalidArgument("at least one weight must be positive".into()));
        }
        if targets
            .iter()
            .zip(&weights)
            .any(|(t, w)| *w > T::zero() && !t.is_finite())
        {
            return Err(Error::InvalidArgument("targets must be finite".into()));
        }
        Ok(Self { targets, weights })
    }

    pub fn uniform(targets: Vec<T>) -> Result<Self> {
        let weights = vec![T::one(); targets.len()];
        Self::new(targets, weights)
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Weighted squared error of `fit` against the targets.
    pub fn objective(&self, fit: &[T]) -> T {
        self.targets
            .iter()
            .zip(&self.weights)
            .zip(fit)
            .map(|((&t, &w), &f)| {
                if w > T::zero() {
                    w * (t - f) * (t - f)
                } else {
                    T::zero()
                }
            })
            .sum()
    }
}

struct Block<T> {
    wsum: T,
    wy: T,
    mean: T,
    len: usize,
}

/// Nondecreasing least-squares fit to the weighted targets.
///
/// Zero-weight positions take the value of the preceding fitted position (or the
/// following one at the start), which leaves the objective unchanged.
pub fn pava<T: Scalar>(seq: &WeightedSequence<T>) -> Vec<T> {
    let n = seq.targets.len();
    let active: Vec<usize> = (0..n).filter(|&i| seq.weights[i] > T::zero()).collect();

    let mut blocks: Vec<Block<T>> = Vec::with_capacity(active.len());
    for &i in &active {
        let w = seq.weights[i];
        // singleton blocks keep their target exactly so feasible input is a fixed point
        let mut cur = Block {
            wsum: w,
            wy: w * seq.targets[i],
            mean: seq.targets[i],
            len: 1,
        };
        while let Some(last) = blocks.last() {
            if last.mean > cur.mean {
                let last = blocks.pop().expect("nonempty");
                let (wsum, wy) = (last.wsum + cur.wsum, last.wy + cur.wy);
                cur = Block {
                    wsum,
                    wy,
                    mean: wy / wsum,
                    len: last.len + cur.len,
                };
            } else {
                break;
            }
        }
        blocks.push(cur);
    }

    let mut fitted_active = Vec::with_capacity(active.len());
    for b in &blocks {
        fitted_active.extend(std::iter::repeat_n(b.mean, b.len));
    }

    let mut out = vec![T::zero(); n];
    let first = fitted_active[0];
    let mut prev: Option<T> = None;
    let mut next_active = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        if next_active < active.len() && active[next_active] == i {
            let v = fitted_active[next_active];
            *slot = v;
            prev = Some(v);
            next_active += 1;
        } else {
            *slot = prev.unwrap_or(first);
        }
    }
    out
}

/// Isotonic fit followed by clamping into `[0, 1]`.
pub fn project_unit_monotone<T: Scalar>(values: &[T], weights: Option<&[T]>) -> Result<Vec<T>> {
    let seq = match weights {
        Some(w) => WeightedSequence::new(values.to_vec(), w.to_vec())?,
        None => WeightedSequence::uniform(values.to_vec())?,
    };
    Ok(pava(&seq).into_iter().map(|v| v.max(T::zero()).min(T::one())).collect())
}

/// Projects arbitrary values on the grid to the nearest CDF (uniform weights by default).
pub fn project_to_cdf<T: Scalar>(values: &[T], grid: &EvalGrid<T>, weights: Option<&[T]>) -> Result<GridCdf<T>> {
    if values.len() != grid.k() {
        return Err(Error::LengthMismatch {
            expected: grid.k(),
            got: values.len(),
        });
    }
    Ok(GridCdf::from_trusted(project_unit_monotone(values, weights)?))
}

/// Cumulative maximum, used to repair rounding-level monotonicity violations.
pub fn running_max<T: Scalar>(mut values: Vec<T>) -> Vec<T> {
    for i in 1..values.len() {
        if values[i] < values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    values
}
