//! Comparison reports and their JSON / CSV forms.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::mc::{McReport, Params};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The input does not satisfy the hypothesis of the statement tested.
    HypothesisViolated,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

/// A simulated or exact quantity set against its predicted value.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub experiment: String,
    pub params: Params,
    pub master_seed: u64,
    /// Zero for purely exact comparisons.
    pub replicas: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub predicted: f64,
    pub rule: String,
    pub verdict: Verdict,
    pub elapsed_ms: u64,
    /// Supporting numbers (per-grid-point values, fitted constants, ...).
    pub details: Value,
}

impl ComparisonReport {
    /// A comparison of an exact (non-random) value.
    pub fn exact(experiment: &str, params: Params, estimate: f64, predicted: f64, rule: impl Into<String>, ok: bool) -> Self {
        ComparisonReport {
            experiment: experiment.to_string(),
            params,
            master_seed: 0,
            replicas: 0,
            estimate,
            ci_low: estimate,
            ci_high: estimate,
            predicted,
            rule: rule.into(),
            verdict: Verdict::from_bool(ok),
            elapsed_ms: 0,
            details: Value::Null,
        }
    }

    /// A comparison of a Monte Carlo estimate.
    pub fn from_mc(mc: &McReport, predicted: f64, rule: impl Into<String>, ok: bool) -> Self {
        ComparisonReport {
            experiment: mc.experiment.clone(),
            params: mc.params.clone(),
            master_seed: mc.master_seed,
            replicas: mc.replicas,
            estimate: mc.estimate,
            ci_low: mc.ci_low,
            ci_high: mc.ci_high,
            predicted,
            rule: rule.into(),
            verdict: Verdict::from_bool(ok),
            elapsed_ms: mc.elapsed_ms,
            details: Value::Null,
        }
    }

    pub fn with_seed(mut self, seed: u64, replicas: u64) -> Self {
        self.master_seed = seed;
        self.replicas = replicas;
        self
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn with_elapsed(mut self, ms: u64) -> Self {
        self.elapsed_ms = ms;
        self
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn passed(&self) -> bool {
        !self.verdict.is_fail()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with `elapsed_ms` zeroed, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.elapsed_ms = 0;
        serde_json::to_string(&c).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// JSON array of reports with `elapsed_ms` zeroed.
pub fn canonical_batch(reports: &[ComparisonReport]) -> String {
    let v: Vec<String> = reports.iter().map(ComparisonReport::canonical_json).collect();
    format!("[{}]", v.join(","))
}

/// A CSV table: header row, one row per grid point, floats in shortest
/// round-trip form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A CSV cell.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    /// Shortest decimal that reads back to the same value; exponent form
    /// for very small or large magnitudes.
    fn cell(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(impl Cell for $t { fn cell(&self) -> String { self.to_string() } })*};
}
int_cell!(u64, i64, usize, u32, bool);

impl Cell for &str {
    fn cell(&self) -> String {
        if self.contains([',', '"', '\n']) {
            format!("\"{}\"", self.replace('"', "\"\""))
        } else {
            self.to_string()
        }
    }
}

impl Cell for String {
    fn cell(&self) -> String {
        self.as_str().cell()
    }
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// `vec![a.cell(), b.cell(), ...]`
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::experiments::Cell::cell(&$x)),*] };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params;

    #[test]
    fn canonical_json_ignores_time() {
        let a = ComparisonReport::exact("x", params! {"n" => 3}, 1.0, 1.0, "eq", true).with_elapsed(5);
        let b = a.clone().with_elapsed(99);
        assert_eq!(a.canonical_json(), b.canonical_json());
        let keys: Vec<String> = serde_json::from_str::<serde_json::Map<String, Value>>(&a.to_json())
            .unwrap()
            .keys()
            .cloned()
            .collect();
        for k in ["experiment", "params", "master_seed", "replicas", "estimate", "ci_low", "ci_high", "predicted", "rule", "verdict", "elapsed_ms"] {
            assert!(keys.contains(&k.to_string()), "{k}");
        }
    }

    #[test]
    fn csv_shortest_floats() {
        let mut t = CsvTable::new(&["z", "lambda"]);
        t.push(row![0.1, 2.0]);
        t.push(row![1e-20, 1.0 / 3.0]);
        assert_eq!(t.render(), "z,lambda\n0.1,2.0\n1e-20,0.3333333333333333\n");
    }
}
