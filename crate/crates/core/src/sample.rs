//! Two-sample data model, the shared evaluation grid and step CDFs on it.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One group's observations: a count of exact zeros plus sorted positive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ZeroInflatedSample<T> {
    #[serde(rename = "zeros")]
    zero_count: usize,
    positives: Vec<T>,
}

#[derive(Deserialize)]
struct RawSample<T> {
    zeros: usize,
    positives: Vec<T>,
}

impl<T: Scalar> TryFrom<RawSample<T>> for ZeroInflatedSample<T> {
    type Error = Error;

    fn try_from(raw: RawSample<T>) -> Result<Self> {
        Self::new(raw.zeros, raw.positives)
    }
}

impl<T: Scalar> ZeroInflatedSample<T> {
    /// Builds a sample from a zero count and positive values (any order).
    pub fn new(zero_count: usize, mut positives: Vec<T>) -> Result<Self> {
        if let Some(bad) = positives.iter().find(|v| !(v.is_finite() && **v > T::zero())) {
            return Err(Error::InvalidArgument(format!(
                "positive values must be finite and > 0, got {bad}"
            )));
        }
        positives.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(Self { zero_count, positives })
    }

    /// Splits raw measurements into zeros and positives. Zero detection is exact.
    pub fn from_values(values: &[T]) -> Result<Self> {
        let mut zeros = 0;
        let mut positives = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    reason: format!("value {v} is not a nonnegative finite number"),
                });
            }
            if v == T::zero() {
                zeros += 1;
            } else {
                positives.push(v);
            }
        }
        Self::new(zeros, positives)
    }

    pub fn zero_count(&self) -> usize {
        self.zero_count
    }

    /// Positive observations, sorted ascending.
    pub fn positives(&self) -> &[T] {
        &self.positives
    }

    pub fn positive_count(&self) -> usize {
        self.positives.len()
    }

    pub fn len(&self) -> usize {
        self.zero_count + self.positives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of positives `<= t`.
    pub fn count_le(&self, t: T) -> usize {
        self.positives.partition_point(|&v| v <= t)
    }

    /// All observations with zeros first, then positives in ascending order.
    pub fn values(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.zero_count];
        out.extend_from_slice(&self.positives);
        out
    }
}

/// The nonmalaria-only sample `x` and the mixture sample `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct TwoSampleData<T> {
    x: ZeroInflatedSample<T>,
    y: ZeroInflatedSample<T>,
}

impl<T: Scalar> TwoSampleData<T> {
    pub fn new(x: ZeroInflatedSample<T>, y: ZeroInflatedSample<T>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyGroup("X"));
        }
        if y.is_empty() {
            return Err(Error::EmptyGroup("Y"));
        }
        Ok(Self { x, y })
    }

    pub fn from_values(x: &[T], y: &[T]) -> Result<Self> {
        Self::new(ZeroInflatedSample::from_values(x)?, ZeroInflatedSample::from_values(y)?)
    }

    pub fn x(&self) -> &ZeroInflatedSample<T> {
        &self.x
    }

    pub fn y(&self) -> &ZeroInflatedSample<T> {
        &self.y
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn m0(&self) -> usize {
        self.x.zero_count()
    }

    pub fn m_plus(&self) -> usize {
        self.x.positive_count()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n0(&self) -> usize {
        self.y.zero_count()
    }

    pub fn n_plus(&self) -> usize {
        self.y.positive_count()
    }

    /// Reads a `group,value` CSV file.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(File::open(path)?)
    }

    /// Reads `group,value` records. Groups are `X`/`Y` (case-insensitive).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (gi, vi) = match (col("group"), col("value")) {
            (Some(g), Some(v)) => (g, v),
            _ => {
                return Err(Error::InvalidRow {
                    row: 1,
                    reason: "header must contain `group` and `value` columns".into(),
                })
            }
        };

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let group = record.get(gi).unwrap_or("");
            let raw = record.get(vi).unwrap_or("");
            let value: f64 = raw.parse().map_err(|_| Error::InvalidRow {
                row,
                reason: format!("cannot parse value `{raw}`"),
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidRow {
                    row,
                    reason: format!("value {raw} is not a nonnegative finite number"),
                });
            }
            let value = T::of(value);
            if group.eq_ignore_ascii_case("x") {
                xs.push(value);
            } else if group.eq_ignore_ascii_case("y") {
                ys.push(value);
            } else {
                return Err(Error::InvalidRow {
                    row,
                    reason: format!("unknown group label `{group}`"),
                });
            }
        }
        Self::from_values(&xs, &ys)
    }

    /// Writes the data back out as `group,value` records.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("group,value\n");
        for v in self.x.values() {
            out.push_str(&format!("X,{v}\n"));
        }
        for v in self.y.values() {
            out.push_str(&format!("Y,{v}\n"));
        }
        out
    }

    /// Sorted distinct positives pooled across both groups.
    pub fn pooled_distinct_positives(&self) -> Vec<T> {
        let mut pooled: Vec<T> = self.x.positives().iter().chain(self.y.positives()).copied().collect();
        pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        pooled.dedup();
        pooled
    }
}

/// Sorted distinct pooled positives `t_1 < ... < t_k` and the trimmed index range.
///
/// The trimmed range is stored with 1-based inclusive bounds `lo = ceil(k q)`,
/// `hi = ceil(k (1 - q))`. Use [`EvalGrid::trimmed`] for a 0-based slice range;
/// mixing the two conventions is an off-by-one hazard.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalGrid<T> {
    points: Vec<T>,
    lo: usize,
    hi: usize,
    q: T,
}

impl<T: Scalar> EvalGrid<T> {
    pub fn build(data: &TwoSampleData<T>, q: T) -> Result<Self> {
        Self::from_points(data.pooled_distinct_positives(), q)
    }

    /// Builds a grid from strictly increasing points.
    pub fn from_points(points: Vec<T>, q: T) -> Result<Self> {
        if !(q > T::zero() && q < T::of(0.5)) {
            return Err(Error::InvalidArgument(format!("q must lie in (0, 0.5), got {q}")));
        }
        if points.is_empty() {
            return Err(Error::Degenerate("no positive observations, grid is empty".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
        }
        let k = points.len();
        let qf = q.to_f64_lossy();
        let lo = ((k as f64) * qf).ceil().max(1.0) as usize;
        let hi = ((k as f64) * (1.0 - qf)).ceil().min(k as f64) as usize;
        debug_assert!(lo <= hi);
        Ok(Self { points, lo, hi, q })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// 1-based inclusive bounds of the trimmed index set.
    pub fn trimmed_bounds(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    /// 0-based range of the trimmed index set.
    pub fn trimmed(&self) -> std::ops::Range<usize> {
        (self.lo - 1)..self.hi
    }

    pub fn k_q(&self) -> usize {
        self.hi - self.lo + 1
    }
}

/// Nondecreasing step CDF values in `[0, 1]` aligned to an [`EvalGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCdf<T> {
    values: Vec<T>,
}

impl<T: Scalar> GridCdf<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::InvalidArgument(format!("cdf value {v} outside [0, 1]")));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("cdf values must be nondecreasing".into()));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_trusted(values: Vec<T>) -> Self {
        debug_assert!(Self::new(values.clone()).is_ok(), "invalid cdf {values:?}");
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Right-continuous evaluation at `t` given the grid this CDF lives on.
    pub fn eval(&self, grid: &[T], t: T) -> T {
        let idx = grid.partition_point(|&g| g <= t);
        if idx == 0 {
            T::zero()
        } else {
            self.values[idx - 1]
        }
    }

    /// Re-evaluates this step function on another set of points.
    pub fn resample(&self, grid: &[T], targets: &[T]) -> Self {
        Self::from_trusted(targets.iter().map(|&t| self.eval(grid, t)).collect())
    }

    /// Jump mass at each grid point.
    pub fn jumps(&self) -> Vec<T> {
        let mut prev = T::zero();
        self.values
            .iter()
            .map(|&v| {
                let j = v - prev;
                prev = v;
                j
            })
            .collect()
    }

    /// Mixture `(1 - w) * self + w * other`.
    pub fn blend(&self, other: &Self, w: T) -> Self {
        let vals = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| ((T::one() - w) * a + w * b).max(T::zero()).min(T::one()))
            .collect::<Vec<_>>();
        // blending two monotone sequences is monotone up to rounding
        Self::from_trusted(crate::isotonic::running_max(vals))
    }
}

/// Empirical CDF of `sample`'s positives evaluated at every grid point.
pub fn empirical_positive_cdf<T: Scalar>(sample: &ZeroInflatedSample<T>, grid: &EvalGrid<T>) -> Result<GridCdf<T>> {
    let total = sample.positive_count();
    if total == 0 {
        return Err(Error::Degenerate("sample has no positive observations".into()));
    }
    let denom = T::of_count(total);
    Ok(GridCdf::from_trusted(
        grid.points()
            .iter()
            .map(|&t| T::of_count(sample.count_le(t)) / denom)
            .collect(),
    ))
}
