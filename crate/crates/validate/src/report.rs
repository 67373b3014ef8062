//! Outcome of one acceptance criterion.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// One line per failed or noteworthy check.
    pub details: Vec<String>,
    /// Every numeric output of the suite; compared bitwise by the determinism check.
    pub metrics: BTreeMap<String, f64>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn new(id: u8, name: &str) -> Self {
        Self { id, name: name.into(), passed: true, details: Vec::new(), metrics: BTreeMap::new(), seconds: 0.0 }
    }

    /// Records a check; a false `ok` fails the criterion.
    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.details.push(format!("FAILED {}", what.into()));
        }
    }

    pub fn note(&mut self, what: impl Into<String>) {
        self.details.push(what.into());
    }

    pub fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// An error aborts the criterion as a failure.
    pub fn fail_with(&mut self, what: impl fmt::Display) {
        self.passed = false;
        self.details.push(format!("ERROR {what}"));
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} ({:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds
        )
    }
}
