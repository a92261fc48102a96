//! Structured pass/fail reports shared by every verification routine.

use serde::{Deserialize, Serialize};

/// One checked inequality instance that failed or came close to failing.
///
/// `location` is the lattice point the check was evaluated at (a prime
/// power, a discriminant, a grid abscissa); it is stored as `f64`, which is
/// exact for every integer location used here. `quantity` is the internal
/// claim id of the inequality, `slack` the signed margin (positive = holds).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub location: f64,
    pub quantity: String,
    pub slack: f64,
}

/// Aggregate outcome of a family of inequality checks.
///
/// Invariants: `passed` iff `failures` is empty; `min_slack` is positive
/// whenever `passed` and at least one check ran.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checked_range: (f64, f64),
    pub passed: bool,
    pub min_slack: f64,
    pub failures: Vec<CheckRecord>,
    pub marginal: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(checked_range: (f64, f64)) -> Self {
        VerificationReport {
            checked_range,
            passed: true,
            min_slack: f64::INFINITY,
            failures: Vec::new(),
            marginal: Vec::new(),
        }
    }

    /// Records one check. Non-positive slack is a failure; positive slack
    /// below `marginal_floor` is flagged as marginal without failing.
    pub fn record(&mut self, location: f64, quantity: &str, slack: f64, marginal_floor: f64) {
        if slack < self.min_slack {
            self.min_slack = slack;
        }
        if !(slack > 0.0) {
            self.passed = false;
            self.failures.push(CheckRecord {
                location,
                quantity: quantity.to_owned(),
                slack,
            });
        } else if slack < marginal_floor {
            self.marginal.push(CheckRecord {
                location,
                quantity: quantity.to_owned(),
                slack,
            });
        }
    }

    /// Associative merge; the result is independent of merge order up to
    /// the ordering of the failure lists, which is re-sorted by location.
    pub fn merge(mut self, other: VerificationReport) -> VerificationReport {
        self.checked_range = (
            self.checked_range.0.min(other.checked_range.0),
            self.checked_range.1.max(other.checked_range.1),
        );
        self.passed &= other.passed;
        self.min_slack = self.min_slack.min(other.min_slack);
        self.failures.extend(other.failures);
        self.marginal.extend(other.marginal);
        self.failures
            .sort_by(|a, b| a.location.total_cmp(&b.location));
        self.marginal
            .sort_by(|a, b| a.location.total_cmp(&b.location));
        self
    }
}
