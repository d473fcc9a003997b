//! Closed-form estimators: the binomial proportions, the plug-in CDFs and the
//! empirical-likelihood maximizer.

use crate::error::{Error, Result};
use crate::estimate::{lambda_star, Flag, Method, MixtureEstimate};
use crate::isotonic::project_to_cdf;
use crate::sample::{empirical_positive_cdf, EvalGrid, TwoSampleData};
use crate::scalar::Scalar;

/// Binomial estimate of `(lambda, p)` from the zero counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialEstimate<T> {
    pub lambda: T,
    pub p: T,
    /// `1 - n0 / (n p)` before clamping into `[0, 1]`.
    pub lambda_raw: T,
    pub clamped: bool,
}

impl<T: Scalar> BinomialEstimate<T> {
    pub fn lambda_star(&self) -> T {
        lambda_star(self.lambda, self.p)
    }
}

/// `p = m0 / m`, `lambda = 1 - n0 / (n p)` clamped into `[0, 1]`.
///
/// Fails with [`Error::Degenerate`] when the X sample has no zeros, since
/// `lambda` is then a division by zero.
pub fn binomial_estimate<T: Scalar>(data: &TwoSampleData<T>) -> Result<BinomialEstimate<T>> {
    if data.m0() == 0 {
        return Err(Error::Degenerate(
            "X sample has no zeros (m0 = 0); binomial lambda is undefined".into(),
        ));
    }
    let p = T::of_count(data.m0()) / T::of_count(data.m());
    let lambda_raw = T::one() - T::of_count(data.n0()) / (T::of_count(data.n()) * p);
    let lambda = lambda_raw.max(T::zero()).min(T::one());
    Ok(BinomialEstimate {
        lambda,
        p,
        lambda_raw,
        clamped: lambda != lambda_raw,
    })
}

/// Pointwise `(F_{Y+} - (1 - lambda*) F1) / lambda*` before projection.
pub fn plugin_f2_raw<T: Scalar>(f_y_plus: &[T], f1: &[T], lambda_star: T) -> Vec<T> {
    f_y_plus
        .iter()
        .zip(f1)
        .map(|(&fy, &f1)| (fy - (T::one() - lambda_star) * f1) / lambda_star)
        .collect()
}

/// Binomial proportions with empirical `F1` and the isotonic plug-in `F2`.
pub fn plugin_estimate<T: Scalar>(data: &TwoSampleData<T>, grid: &EvalGrid<T>) -> Result<MixtureEstimate<T>> {
    let bin = binomial_estimate(data)?;
    let f1 = empirical_positive_cdf(data.x(), grid)?;
    let f_y = empirical_positive_cdf(data.y(), grid)?;
    let ls = bin.lambda_star();
    if !(ls > T::zero()) {
        return Err(Error::Degenerate("binomial lambda* is 0; F2 is not identified".into()));
    }
    let raw = plugin_f2_raw(f_y.values(), f1.values(), ls);
    let f2 = project_to_cdf(&raw, grid, None)?;
    let mut est = MixtureEstimate::new(bin.lambda, bin.p, grid, f1, f2, Method::BinomialPlugin);
    if bin.clamped {
        est.push_flag(Flag::LambdaClamped);
    }
    Ok(est)
}

/// `(n+ / n, (m0 + n0) / (m + n0))`, defined for any data.
pub fn el_proportions<T: Scalar>(data: &TwoSampleData<T>) -> (T, T) {
    let lambda = T::of_count(data.n_plus()) / T::of_count(data.n());
    let p = T::of_count(data.m0() + data.n0()) / T::of_count(data.m() + data.n0());
    (lambda, p)
}

/// Closed-form maximizer of the empirical likelihood.
///
/// Inconsistent for `lambda` and `F2` whenever both mixture weights are interior:
/// `lambda` converges to `(1 - lambda)(1 - p) + lambda` and `F2` to `F_{Y+}`.
pub fn empirical_likelihood_estimate<T: Scalar>(
    data: &TwoSampleData<T>,
    grid: &EvalGrid<T>,
) -> Result<MixtureEstimate<T>> {
    if data.n_plus() == 0 || data.m_plus() == 0 {
        return Err(Error::Degenerate(
            "empirical likelihood needs positive values in both groups".into(),
        ));
    }
    let (lambda, p) = el_proportions(data);
    let f1 = empirical_positive_cdf(data.x(), grid)?;
    let f2 = empirical_positive_cdf(data.y(), grid)?;
    let mut est = MixtureEstimate::new(lambda, p, grid, f1, f2, Method::EmpiricalLikelihood);
    if grid.k() < data.m_plus() + data.n_plus() {
        est.push_flag(Flag::TiedPositives);
    }
    Ok(est)
}
