use std::fmt::Write as _;

use serde::Serialize;

use crate::estimate::Method;

use super::{RepErrors, ScenarioSpec};

/// Averages for one estimator in one cell. Raw scale: MSEs and KS distances
/// as fractions; the table renderer applies the x1000 / x100 factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodSummary {
    pub mse_lambda: f64,
    pub mse_p: f64,
    pub ks_f1: f64,
    pub ks_f2: f64,
    /// Replications contributing to each metric, in the same order.
    pub used: [usize; 4],
    /// Replications dropped because the estimator was degenerate.
    pub dropped: [usize; 4],
    /// Replications whose `F2` was unidentified and scored at distance 1.
    pub f2_unidentified: usize,
}

/// Table block: title, row label, display factor, metric.
type Block = (&'static str, &'static str, f64, fn(&MethodSummary) -> f64);

fn mean_of(values: &[Option<f64>]) -> (f64, usize, usize) {
    let mut sum = 0.0;
    let mut used = 0;
    for v in values.iter().flatten() {
        sum += v;
        used += 1;
    }
    let mean = if used > 0 { sum / used as f64 } else { f64::NAN };
    (mean, used, values.len() - used)
}

impl MethodSummary {
    pub fn from_reps(reps: impl Iterator<Item = RepErrors>) -> Self {
        let reps: Vec<RepErrors> = reps.collect();
        let cols = [
            reps.iter().map(|r| r.sq_lambda).collect::<Vec<_>>(),
            reps.iter().map(|r| r.sq_p).collect(),
            reps.iter().map(|r| r.ks_f1).collect(),
            reps.iter().map(|r| r.ks_f2).collect(),
        ];
        let stats: Vec<(f64, usize, usize)> = cols.iter().map(|c| mean_of(c)).collect();
        Self {
            mse_lambda: stats[0].0,
            mse_p: stats[1].0,
            ks_f1: stats[2].0,
            ks_f2: stats[3].0,
            used: [stats[0].1, stats[1].1, stats[2].1, stats[3].1],
            dropped: [stats[0].2, stats[1].2, stats[2].2, stats[3].2],
            f2_unidentified: reps.iter().filter(|r| r.f2_unidentified).count(),
        }
    }

    pub fn max_drop_rate(&self) -> f64 {
        let total = self.used[0] + self.dropped[0];
        if total == 0 {
            return 0.0;
        }
        *self.dropped.iter().max().expect("four metrics") as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub spec: ScenarioSpec,
    pub metrics: Vec<(Method, MethodSummary)>,
}

impl CellReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.metrics.iter().find(|(m, _)| *m == method).map(|(_, s)| s)
    }
}

/// Results of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub cells: Vec<CellReport>,
    pub runtime_secs: f64,
}

fn symbol(method: Method, tilde_for_baseline: bool) -> &'static str {
    match method {
        Method::MmlEm => "hat",
        Method::BinomialPlugin if tilde_for_baseline => "tilde",
        Method::BinomialPlugin => "binomial",
        Method::EmpiricalLikelihood => "el",
    }
}

impl SimulationReport {
    pub fn cell(&self, lambda: f64, p: f64, m: usize, n: usize) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.spec.lambda == lambda && c.spec.p == p && c.spec.m == m && c.spec.n == n)
    }

    fn methods(&self) -> Vec<Method> {
        self.cells
            .first()
            .map(|c| c.metrics.iter().map(|(m, _)| *m).collect())
            .unwrap_or_default()
    }

    /// Panels keyed by `(m, n)` in first-seen order.
    fn panels(&self) -> Vec<((usize, usize), Vec<&CellReport>)> {
        let mut panels: Vec<((usize, usize), Vec<&CellReport>)> = Vec::new();
        for c in &self.cells {
            let key = (c.spec.m, c.spec.n);
            match panels.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(c),
                None => panels.push((key, vec![c])),
            }
        }
        panels
    }

    /// Text tables in the layout of the MSE and KS tables: rows are
    /// metric x estimator, columns are `(lambda, p)` cells, panels are `(m, n)`.
    pub fn render_text(&self) -> String {
        let methods = self.methods();
        let mut out = String::new();
        let blocks: [Block; 4] = [
            ("MSEs (x1000)", "MSE of lambda", 1000.0, |s| s.mse_lambda),
            ("MSEs (x1000)", "MSE of p", 1000.0, |s| s.mse_p),
            ("KS distance (x100)", "|F1-F1|inf", 100.0, |s| s.ks_f1),
            ("KS distance (x100)", "|F2-F2|inf", 100.0, |s| s.ks_f2),
        ];
        for (title_idx, title) in ["MSEs (x1000)", "KS distance (x100)"].iter().enumerate() {
            let _ = writeln!(out, "{title}");
            for ((m, n), cells) in self.panels() {
                let _ = write!(out, "{:<26}", "lambda");
                for c in &cells {
                    let _ = write!(out, "{:>8}", c.spec.lambda);
                }
                let _ = write!(out, "\n{:<26}", "p");
                for c in &cells {
                    let _ = write!(out, "{:>8}", c.spec.p);
                }
                let _ = writeln!(out, "\n{:-^1$}", format!(" m={m}, n={n} "), 26 + 8 * cells.len());
                for (_, label, scale, get) in blocks.iter().filter(|b| b.0 == *title) {
                    for &method in &methods {
                        let row = format!("{label} [{}]", symbol(method, true));
                        let _ = write!(out, "{row:<26}");
                        for c in &cells {
                            let v = c.summary(method).map_or(f64::NAN, |s| get(s) * scale);
                            let _ = write!(out, "{v:>8.2}");
                        }
                        out.push('\n');
                    }
                }
            }
            if title_idx == 0 {
                out.push('\n');
            }
        }
        let unidentified: usize = self
            .cells
            .iter()
            .flat_map(|c| c.metrics.iter().map(|(_, s)| s.f2_unidentified))
            .sum();
        let dropped: usize = self
            .cells
            .iter()
            .flat_map(|c| c.metrics.iter().map(|(_, s)| s.dropped.iter().sum::<usize>()))
            .sum();
        if unidentified > 0 {
            let _ = writeln!(out, "\nunidentified F2 scored at distance 1: {unidentified}");
        }
        if dropped > 0 {
            let _ = writeln!(out, "\ndegenerate metric values dropped: {dropped}");
        }
        let _ = writeln!(out, "\nruntime: {:.1}s", self.runtime_secs);
        out
    }

    /// One CSV row per (cell, estimator); MSEs x1000, KS x100.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "f1,f2,m,n,lambda,p,reps,seed,method,mse_lambda_x1000,mse_p_x1000,ks_f1_x100,ks_f2_x100,dropped_lambda,dropped_p,dropped_f1,dropped_f2,f2_unidentified\n",
        );
        for c in &self.cells {
            let s = &c.spec;
            for (method, m) in &c.metrics {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{},{},{},{},{}",
                    s.f1.label(),
                    s.f2.label(),
                    s.m,
                    s.n,
                    s.lambda,
                    s.p,
                    s.n_reps,
                    s.seed,
                    method,
                    m.mse_lambda * 1000.0,
                    m.mse_p * 1000.0,
                    m.ks_f1 * 100.0,
                    m.ks_f2 * 100.0,
                    m.dropped[0],
                    m.dropped[1],
                    m.dropped[2],
                    m.dropped[3],
                    m.f2_unidentified,
                );
            }
        }
        out
    }
}
