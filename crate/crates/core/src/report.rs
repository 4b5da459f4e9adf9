//! Check records and the verification report.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured but not asserted.
    Reported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub paper_location: String,
    pub measured: f64,
    pub expected: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
    pub notes: String,
}

impl CheckRecord {
    /// Passes when `residual <= tolerance`; NaN fails.
    pub fn residual(name: impl Into<String>, location: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self {
            name: name.into(),
            paper_location: location.into(),
            measured: residual,
            expected: Some(0.0),
            residual,
            tolerance,
            status,
            notes: String::new(),
        }
    }

    /// Compares `measured` to `expected` with the residual taken relative to
    /// `max(1, |expected|)`.
    pub fn value(name: impl Into<String>, location: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let residual = (measured - expected).abs() / expected.abs().max(1.0);
        let mut rec = Self::residual(name, location, residual, tolerance);
        rec.measured = measured;
        rec.expected = Some(expected);
        rec
    }

    /// Passes when `measured <= bound` up to `tolerance` relative slack.
    pub fn bound(name: impl Into<String>, location: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        let excess = (measured - bound).max(0.0) / bound.abs().max(1.0);
        let mut rec = Self::residual(name, location, excess, tolerance);
        rec.measured = measured;
        rec.expected = Some(bound);
        rec
    }

    /// Passes when `measured >= floor`.
    pub fn at_least(name: impl Into<String>, location: &str, measured: f64, floor: f64) -> Self {
        let deficit = (floor - measured).max(0.0);
        let mut rec = Self::residual(name, location, deficit, 0.0);
        rec.measured = measured;
        rec.expected = Some(floor);
        rec.tolerance = floor.abs();
        rec
    }

    pub fn reported(
        name: impl Into<String>,
        location: &str,
        measured: f64,
        expected: Option<f64>,
        residual: f64,
    ) -> Self {
        Self {
            name: name.into(),
            paper_location: location.into(),
            measured,
            expected,
            residual,
            tolerance: 0.0,
            status: Status::Reported,
            notes: String::new(),
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn demote_to_reported(mut self) -> Self {
        self.status = Status::Reported;
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Merge several records of one check into the worst one, keeping the name.
pub fn worst(name: &str, location: &str, records: Vec<CheckRecord>) -> CheckRecord {
    let mut it = records.into_iter();
    let Some(mut acc) = it.next() else {
        return CheckRecord::residual(name, location, 0.0, 0.0).with_notes("vacuous: nothing to check");
    };
    for r in it {
        let worse = match (acc.status, r.status) {
            (Status::Fail, Status::Fail) | (Status::Pass, Status::Pass) | (Status::Reported, Status::Reported) => {
                r.residual > acc.residual
            }
            (_, Status::Fail) => true,
            _ => false,
        };
        if worse {
            acc = r;
        }
    }
    acc.name = name.into();
    acc.paper_location = location.into();
    acc
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub reported: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: serde_json::Value,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    /// Excluded from the canonical JSON unless explicitly requested.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl VerificationReport {
    pub fn new(config: serde_json::Value, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Reported => summary.reported += 1,
            }
        }
        Self {
            config,
            checks,
            summary,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn any_failed(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}
