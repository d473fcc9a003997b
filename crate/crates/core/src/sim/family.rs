use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma, LogNormal};

use crate::error::{Error, Result};

/// Positive-valued component distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `log X ~ N(mean_log, var_log)`.
    LogNormal { mean_log: f64, var_log: f64 },
    /// Shape/scale parameterization.
    Gamma { shape: f64, scale: f64 },
}

impl Family {
    pub fn lognormal(mean_log: f64, var_log: f64) -> Self {
        Family::LogNormal { mean_log, var_log }
    }

    pub fn gamma(shape: f64, scale: f64) -> Self {
        Family::Gamma { shape, scale }
    }

    /// Parses a family tag with its parameters, e.g. `lognormal` with `[0, 1]`.
    pub fn from_tag(tag: &str, params: &[f64]) -> Result<Self> {
        let fam = match (tag.to_ascii_lowercase().as_str(), params) {
            ("lognormal" | "ln", [a, b]) => Family::lognormal(*a, *b),
            ("gamma" | "gam", [a, b]) => Family::gamma(*a, *b),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown family `{tag}` with {} parameters",
                    params.len()
                )))
            }
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::LogNormal { mean_log, var_log } => mean_log.is_finite() && var_log > 0.0,
            Family::Gamma { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid family parameters {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Family::LogNormal { mean_log, var_log } => rand_distr::LogNormal::new(mean_log, var_log.sqrt())
                .expect("validated")
                .sample(rng),
            Family::Gamma { shape, scale } => rand_distr::Gamma::new(shape, scale).expect("validated").sample(rng),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Family::LogNormal { mean_log, var_log } => {
                LogNormal::new(mean_log, var_log.sqrt()).expect("validated").cdf(x)
            }
            Family::Gamma { shape, scale } => Gamma::new(shape, 1.0 / scale).expect("validated").cdf(x),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Family::LogNormal { mean_log, var_log } => format!("LN({mean_log},{var_log})"),
            Family::Gamma { shape, scale } => format!("GAM({shape},{scale})"),
        }
    }
}
