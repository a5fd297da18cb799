//! What a command produces and how it is written.

use std::io::Write;

use cramer_model::experiments::{ComparisonReport, CsvTable};
use serde_json::{json, Map, Value};

use crate::{Format, RunConfig};

/// Result of one command: the effective configuration, free-form values,
/// comparison reports and an optional table for CSV output.
#[derive(Debug)]
pub struct Output {
    pub command: &'static str,
    pub config: Map<String, Value>,
    pub result: Value,
    pub reports: Vec<ComparisonReport>,
    pub table: Option<CsvTable>,
    /// Set when the command already wrote its files (`suite`); `--output`
    /// then names a directory and only the summary goes to stdout.
    pub wrote_files: bool,
    /// Overrides the verdict of the reports (`suite` counts budgets too).
    pub failed: Option<bool>,
}

impl Output {
    pub fn failed(&self) -> bool {
        self.failed.unwrap_or_else(|| self.reports.iter().any(|r| !r.passed()))
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn to_json(&self) -> String {
        let mut v = json!({
            "command": self.command,
            "config": self.config,
            "result": self.result,
            "reports": self.reports,
        });
        if !self.reports.is_empty() || self.failed.is_some() {
            v["verdict"] = json!(if self.failed() { "fail" } else { "pass" });
        }
        serde_json::to_string_pretty(&v).expect("output serializes") + "\n"
    }

    /// The command's own table, or one row per report.
    pub fn to_csv(&self) -> String {
        if let Some(t) = &self.table {
            return t.render();
        }
        let mut t = CsvTable::new(&["experiment", "estimate", "ci_low", "ci_high", "predicted", "verdict", "rule"]);
        for r in &self.reports {
            let verdict = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            t.push(cramer_model::row![r.experiment, r.estimate, r.ci_low, r.ci_high, r.predicted, verdict, r.rule]);
        }
        t.render()
    }

    pub fn emit(&self, opts: &RunConfig) -> std::io::Result<()> {
        let text = match opts.format.unwrap_or(Format::Json) {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        };
        match &opts.output {
            Some(path) if !self.wrote_files => std::fs::write(path, text),
            _ => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}
