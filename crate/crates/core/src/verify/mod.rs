//! Executable verification suite.
//!
//! Every check produces a [`CheckReport`] comparing a measured value with a
//! tolerance from `tolerances.toml`. Runs are deterministic given the seed;
//! the seed moves the random point sets, never the checks or thresholds.

mod checks;
mod manifest;

use serde::{Deserialize, Serialize};

pub use checks::{
    tanh_witness_search, verify_basis_roundtrip, verify_continuity, verify_positivity_suite,
    verify_reproducing, verify_subduality_consistency, verify_table1, TanhWitness,
};
pub use manifest::{manifest, Manifest};

use crate::error::{Result, RksError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// How `measured` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
}

impl Relation {
    fn holds(self, measured: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => measured <= tolerance,
            Relation::AtLeast => measured >= tolerance,
            Relation::Below => measured < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    /// The claim being reproduced.
    pub anchor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl CheckReport {
    /// Status is derived from the comparison; a NaN measurement fails.
    pub fn new(
        name: &str,
        measured: f64,
        relation: Relation,
        tolerance: f64,
        anchor: &str,
    ) -> Self {
        let status = if relation.holds(measured, tolerance) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckReport {
            name: name.to_string(),
            status,
            measured,
            relation,
            tolerance,
            anchor: anchor.to_string(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Check groups accepted by [`run_suite`], in run order.
pub const GROUPS: [&str; 6] = [
    "table1",
    "basis_roundtrip",
    "positivity",
    "subduality",
    "reproducing",
    "continuity",
];

/// Runs every group, or only `only`.
pub fn run_suite(seed: u64, only: Option<&str>) -> Result<Vec<CheckReport>> {
    if let Some(name) = only {
        if !GROUPS.contains(&name) {
            return Err(RksError::invalid(format!(
                "unknown check group `{name}`; expected one of {GROUPS:?}"
            )));
        }
    }
    let mut reports = Vec::new();
    for group in GROUPS.iter().filter(|g| only.is_none_or(|o| o == **g)) {
        match *group {
            "table1" => reports.extend(verify_table1()?),
            "basis_roundtrip" => reports.push(verify_basis_roundtrip(seed)?),
            "positivity" => reports.extend(verify_positivity_suite(seed)?),
            "subduality" => reports.extend(verify_subduality_consistency()?),
            "reproducing" => reports.push(verify_reproducing(seed)?),
            "continuity" => reports.push(verify_continuity(seed)?),
            _ => unreachable!(),
        }
    }
    Ok(reports)
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(CheckReport::passed)
}

pub fn report_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// One line per check plus a total.
pub fn summary(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let tag = if r.passed() { "PASS" } else { "FAIL" };
        let rel = match r.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
        };
        out.push_str(&format!(
            "{tag} {:<34} {:e} {rel} {:e}  [{}]\n",
            r.name, r.measured, r.tolerance, r.anchor
        ));
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    out.push_str(&format!("{passed}/{} checks passed\n", reports.len()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_relation() {
        assert!(CheckReport::new("a", 0.0, Relation::AtMost, 0.0, "").passed());
        assert!(!CheckReport::new("a", f64::NAN, Relation::AtMost, 1.0, "").passed());
        assert!(!CheckReport::new("a", -1e-6, Relation::Below, -1e-6, "").passed());
        assert!(CheckReport::new("a", -1e-11, Relation::AtLeast, -1e-10, "").passed());
    }

    #[test]
    fn unknown_group_is_rejected() {
        assert!(run_suite(0, Some("nope")).is_err());
    }

    #[test]
    fn table1_group_has_three_reports() {
        let r = run_suite(0, Some("table1")).unwrap();
        assert_eq!(r.len(), 3);
        assert!(all_passed(&r), "{}", summary(&r));
    }
}
