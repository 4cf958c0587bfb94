//! Report rows shared by the test harness and the CLI.
//!
//! One row carries one computed value. `params` echoes everything needed to
//! replay the row; `wall_seconds` is the only field that varies between
//! identical runs.

use serde::{Deserialize, Serialize};

use crate::verify::CriterionResult;

/// Column order of the CSV form. Bump [`REPORT_VERSION`] when it changes.
pub const COLUMNS: [&str; 10] = [
    "id",
    "experiment",
    "params",
    "quantity",
    "value",
    "passed",
    "tolerance",
    "anchor",
    "detail",
    "wall_seconds",
];

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Sort key, unique within a report.
    pub id: String,
    pub experiment: String,
    pub params: String,
    pub quantity: String,
    pub value: f64,
    pub passed: bool,
    /// Tolerance the pass flag was decided with; NaN when nothing is asserted.
    pub tolerance: f64,
    /// Property a failure violates; empty for passing rows.
    pub anchor: String,
    pub detail: String,
    pub wall_seconds: f64,
}

impl ReportRow {
    pub fn new(
        id: impl Into<String>,
        experiment: &str,
        params: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
    ) -> Self {
        Self {
            id: id.into(),
            experiment: experiment.into(),
            params: params.into(),
            quantity: quantity.into(),
            value,
            passed: true,
            tolerance: f64::NAN,
            anchor: String::new(),
            detail: String::new(),
            wall_seconds: 0.0,
        }
    }

    /// Sets the verdict; the anchor is kept only when the check fails.
    pub fn check(mut self, passed: bool, tolerance: f64, anchor: &str) -> Self {
        self.passed = passed;
        self.tolerance = tolerance;
        self.anchor = if passed { String::new() } else { anchor.into() };
        self
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.wall_seconds = seconds;
        self
    }
}

impl From<&CriterionResult> for ReportRow {
    fn from(r: &CriterionResult) -> Self {
        ReportRow::new(
            format!("verify/{:02}", r.id),
            "verify-all",
            format!("criterion={}", r.id),
            r.name.clone(),
            r.worst,
        )
        .check(r.passed, r.tolerance, &r.anchor)
        .detail(r.detail.clone())
        .timed(r.seconds)
    }
}

/// Sorts by id so that output order never depends on scheduling.
pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| a.id.cmp(&b.id));
}

pub fn all_passed(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_only_on_failure() {
        let ok = ReportRow::new("a", "x", "", "q", 1.0).check(true, 1e-9, "prop");
        assert!(ok.anchor.is_empty());
        let bad = ReportRow::new("a", "x", "", "q", 1.0).check(false, 1e-9, "prop");
        assert_eq!(bad.anchor, "prop");
        assert!(!all_passed(&[ok, bad]));
    }

    #[test]
    fn rows_sort_by_id() {
        let mut rows: Vec<_> = ["b/2", "a/10", "b/1"]
            .iter()
            .map(|id| ReportRow::new(*id, "x", "", "q", 0.0))
            .collect();
        sort_rows(&mut rows);
        let ids: Vec<_> = rows.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a/10", "b/1", "b/2"]);
    }
}
