use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::sample::{EvalGrid, GridCdf};
use crate::scalar::Scalar;

/// Which estimator produced a [`MixtureEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BinomialPlugin,
    EmpiricalLikelihood,
    MmlEm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BinomialPlugin => "binomial_plugin",
            Method::EmpiricalLikelihood => "empirical_likelihood",
            Method::MmlEm => "mml_em",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Diagnostics attached to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// The raw binomial lambda fell outside [0, 1] and was clamped.
    LambdaClamped,
    /// The EM run hit `max_iters` before the likelihood increment dropped below `tol`.
    NotConverged,
    /// Every F2 isotonic weight vanished in some M-step; F2 was carried over.
    F2WeightsVanished,
    /// Positive observations tie across or within groups.
    TiedPositives,
}

impl Flag {
    /// Flags that signal a boundary or failed fit rather than a data note.
    pub fn is_degenerate(self) -> bool {
        !matches!(self, Flag::TiedPositives)
    }
}

/// `lambda / (1 - p (1 - lambda))`, the share of the second component among positive Y values.
pub fn lambda_star<T: Scalar>(lambda: T, p: T) -> T {
    let denom = T::one() - p * (T::one() - lambda);
    if denom > T::zero() {
        (lambda / denom).min(T::one())
    } else {
        T::zero()
    }
}

/// A fitted `(lambda, p, F1, F2)` on an evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureEstimate<T> {
    pub lambda: T,
    pub p: T,
    pub lambda_star: T,
    pub points: Vec<T>,
    pub f1: GridCdf<T>,
    pub f2: GridCdf<T>,
    pub method: Method,
    pub loglik: Option<T>,
    pub iterations: Option<usize>,
    pub flags: Vec<Flag>,
}

impl<T: Scalar> MixtureEstimate<T> {
    pub fn new(lambda: T, p: T, grid: &EvalGrid<T>, f1: GridCdf<T>, f2: GridCdf<T>, method: Method) -> Self {
        debug_assert_eq!(f1.len(), grid.k());
        debug_assert_eq!(f2.len(), grid.k());
        Self {
            lambda,
            p,
            lambda_star: lambda_star(lambda, p),
            points: grid.points().to_vec(),
            f1,
            f2,
            method,
            loglik: None,
            iterations: None,
            flags: Vec::new(),
        }
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    pub(crate) fn push_flag(&mut self, flag: Flag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    /// Implied CDF of the positive Y values, `(1 - lambda*) F1 + lambda* F2`.
    pub fn f_y_plus(&self) -> GridCdf<T> {
        self.f1.blend(&self.f2, self.lambda_star)
    }

    /// `t,f1,f2` rows.
    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("t,f1,f2\n");
        for ((t, a), b) in self.points.iter().zip(self.f1.values()).zip(self.f2.values()) {
            out.push_str(&format!("{t},{a},{b}\n"));
        }
        out
    }

    fn pairs(&self, cdf: &GridCdf<T>) -> Vec<[f64; 2]> {
        self.points
            .iter()
            .zip(cdf.values())
            .map(|(t, v)| [t.to_f64_lossy(), v.to_f64_lossy()])
            .collect()
    }
}

impl<T: Scalar> Serialize for MixtureEstimate<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MixtureEstimate", 9)?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("lambda", &self.lambda.to_f64_lossy())?;
        s.serialize_field("p", &self.p.to_f64_lossy())?;
        s.serialize_field("lambda_star", &self.lambda_star.to_f64_lossy())?;
        s.serialize_field("f1", &self.pairs(&self.f1))?;
        s.serialize_field("f2", &self.pairs(&self.f2))?;
        s.serialize_field("flags", &self.flags)?;
        s.serialize_field("loglik", &self.loglik.map(|v| v.to_f64_lossy()))?;
        s.serialize_field("iterations", &self.iterations)?;
        s.end()
    }
}
