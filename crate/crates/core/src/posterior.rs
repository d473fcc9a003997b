//! Kernel densities of the log positive levels under each component and the
//! posterior probability that a positive value came from `F2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::MixtureEstimate;
use crate::mml::GridCounts;
use crate::sample::GridCdf;
use crate::scalar::Scalar;

/// Number of evaluation points of a [`DensityEstimate`].
pub const DENSITY_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidths<T> {
    pub h1: T,
    pub h2: T,
    pub sigma1: T,
    pub sigma2: T,
}

/// Mean and variance of `log t` under the jump masses of `cdf`.
fn log_moments<T: Scalar>(cdf: &GridCdf<T>, points: &[T]) -> (T, T) {
    let mut m1 = T::zero();
    let mut m2 = T::zero();
    for (w, t) in cdf.jumps().into_iter().zip(points) {
        let x = t.ln();
        m1 = m1 + w * x;
        m2 = m2 + w * x * x;
    }
    (m1, m2 - m1 * m1)
}

fn component_sigma<T: Scalar>(cdf: &GridCdf<T>, points: &[T], name: &str) -> Result<T> {
    let (mean, var) = log_moments(cdf, points);
    let scale = T::one() + mean * mean;
    if !(var > T::epsilon() * T::of(64.0) * scale) {
        return Err(Error::Degenerate(format!(
            "{name} puts all its mass on one value; log variance is zero"
        )));
    }
    Ok(var.sqrt())
}

/// `h1 = 1.06 sigma1 (m+ + n+)^(-1/5)` and `h2 = 1.06 sigma2 n+^(-1/5)`, with
/// the sigmas taken from the moments of `log t` under the fitted CDFs.
pub fn rule_of_thumb_bandwidths<T: Scalar>(est: &MixtureEstimate<T>, counts: &GridCounts<T>) -> Result<Bandwidths<T>> {
    if counts.n_plus == 0 {
        return Err(Error::Degenerate("no positive Y values (n+ = 0)".into()));
    }
    let sigma1 = component_sigma(&est.f1, &est.points, "F1")?;
    let sigma2 = component_sigma(&est.f2, &est.points, "F2")?;
    let fifth = T::of(-0.2);
    let c = T::of(1.06);
    Ok(Bandwidths {
        h1: c * sigma1 * T::of_count(counts.m_plus + counts.n_plus).powf(fifth),
        h2: c * sigma2 * T::of_count(counts.n_plus).powf(fifth),
        sigma1,
        sigma2,
    })
}

/// Gaussian kernel density of `log t` under the jump masses of `cdf`.
pub fn kde<T: Scalar>(cdf: &GridCdf<T>, points: &[T], bandwidth: T, eval_points: &[T]) -> Result<Vec<T>> {
    if !(bandwidth > T::zero() && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be > 0, got {bandwidth}"
        )));
    }
    if cdf.len() != points.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: cdf.len(),
        });
    }
    let norm = T::one() / (T::of(2.0 * std::f64::consts::PI).sqrt() * bandwidth);
    let half = T::of(0.5);
    let atoms: Vec<(T, T)> = cdf
        .jumps()
        .into_iter()
        .zip(points)
        .filter(|(w, _)| *w > T::zero())
        .map(|(w, t)| (w, t.ln()))
        .collect();
    Ok(eval_points
        .iter()
        .map(|&x| {
            atoms
                .iter()
                .map(|&(w, lt)| {
                    let z = (lt - x) / bandwidth;
                    w * (-half * z * z).exp()
                })
                .sum::<T>()
                * norm
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate<T> {
    /// Equally spaced log-scale evaluation points.
    pub eval_points: Vec<T>,
    pub g1: Vec<T>,
    pub g2: Vec<T>,
    pub h1: T,
    pub h2: T,
    pub sigma1: T,
    pub sigma2: T,
}

/// Densities of both components on 512 points spanning the log grid padded by
/// three of the larger bandwidth on each side.
pub fn density_estimate<T: Scalar>(est: &MixtureEstimate<T>, counts: &GridCounts<T>) -> Result<DensityEstimate<T>> {
    let bw = rule_of_thumb_bandwidths(est, counts)?;
    let h = bw.h1.max(bw.h2);
    let lo = est.points[0].ln() - T::of(3.0) * h;
    let hi = est.points[est.points.len() - 1].ln() + T::of(3.0) * h;
    let step = (hi - lo) / T::of_count(DENSITY_POINTS - 1);
    let eval_points: Vec<T> = (0..DENSITY_POINTS).map(|i| lo + step * T::of_count(i)).collect();
    Ok(DensityEstimate {
        g1: kde(&est.f1, &est.points, bw.h1, &eval_points)?,
        g2: kde(&est.f2, &est.points, bw.h2, &eval_points)?,
        eval_points,
        h1: bw.h1,
        h2: bw.h2,
        sigma1: bw.sigma1,
        sigma2: bw.sigma2,
    })
}

/// `eta(x) = lambda* g2 / ((1 - lambda*) g1 + lambda* g2)`.
///
/// `None` where both densities underflow, or the denominator vanishes: there
/// the data say nothing about `x`, which is not the same as `eta = 0`.
pub fn posterior_probability<T: Scalar>(dens: &DensityEstimate<T>, lambda_star: T) -> Result<Vec<Option<T>>> {
    if !(T::zero()..=T::one()).contains(&lambda_star) {
        return Err(Error::InvalidArgument(format!(
            "lambda* must lie in [0, 1], got {lambda_star}"
        )));
    }
    let floor = T::log_floor();
    Ok(dens
        .g1
        .iter()
        .zip(&dens.g2)
        .map(|(&g1, &g2)| {
            if g1 < floor && g2 < floor {
                return None;
            }
            let num = lambda_star * g2;
            let den = (T::one() - lambda_star) * g1 + num;
            if den > T::zero() {
                Some((num / den).min(T::one()))
            } else {
                None
            }
        })
        .collect())
}

/// `x,g1,g2,eta` rows; missing posterior values are left empty.
pub fn posterior_csv<T: Scalar>(dens: &DensityEstimate<T>, eta: &[Option<T>]) -> String {
    let mut out = String::from("x,g1,g2,eta\n");
    for (i, x) in dens.eval_points.iter().enumerate() {
        let e = eta.get(i).copied().flatten().map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{x},{},{},{e}\n", dens.g1[i], dens.g2[i]));
    }
    out
}
