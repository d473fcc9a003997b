use serde::Deserialize;

use crate::error::{Error, Result};

use super::{Family, ScenarioSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct FamilySpec {
    family: String,
    params: Vec<f64>,
}

/// Declarative simulation design.
///
/// ```toml
/// scenario = 1            # 1 or 2 picks the preset families
/// lambda = [0.25, 0.5, 0.75]
/// p = [0.25, 0.5, 0.75]
/// m = [100, 150]          # paired with n by position
/// n = [100, 250]
/// reps = 1000
/// seed = 42
/// # families = { f1 = { family = "lognormal", params = [0, 1] }, f2 = { ... } }
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    scenario: Option<u8>,
    families: Option<FamiliesSpec>,
    lambda: OneOrMany<f64>,
    p: OneOrMany<f64>,
    m: OneOrMany<usize>,
    n: OneOrMany<usize>,
    reps: usize,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
struct FamiliesSpec {
    f1: FamilySpec,
    f2: FamilySpec,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Expands the design into cells: panels `(m, n)` outermost, then `lambda`, then `p`.
    pub fn cells(&self, default_seed: u64) -> Result<Vec<ScenarioSpec>> {
        let (f1, f2) = match (&self.families, self.scenario) {
            (Some(f), _) => (
                Family::from_tag(&f.f1.family, &f.f1.params)?,
                Family::from_tag(&f.f2.family, &f.f2.params)?,
            ),
            (None, Some(1)) => (Family::lognormal(0.0, 1.0), Family::lognormal(2.0, 1.0)),
            (None, Some(2)) => (Family::gamma(1.0, 1.0), Family::gamma(4.0, 3.0)),
            (None, other) => {
                return Err(Error::Config(format!(
                    "need `families` or `scenario = 1 | 2`, got scenario {other:?}"
                )))
            }
        };
        let (ms, ns) = (self.m.to_vec(), self.n.to_vec());
        if ms.len() != ns.len() {
            return Err(Error::Config("`m` and `n` must have the same length".into()));
        }
        let seed = self.seed.unwrap_or(default_seed);
        let mut specs = Vec::new();
        for (&m, &n) in ms.iter().zip(&ns) {
            for &lambda in &self.lambda.to_vec() {
                for &p in &self.p.to_vec() {
                    let spec = ScenarioSpec {
                        f1,
                        f2,
                        lambda,
                        p,
                        m,
                        n,
                        n_reps: self.reps,
                        seed,
                    };
                    spec.validate()?;
                    specs.push(spec);
                }
            }
        }
        Ok(specs)
    }
}
