//! Structured results for inequality batteries: one row per checked
//! statement instance, plus empirically fitted constants.

use alloc::{string::String, vec::Vec};
use serde::{Deserialize, Serialize};

/// One checked inequality instance `lhs <= rhs` (after slack).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    /// Statement identifier, e.g. `pgram` or `det_lipschitz`.
    pub statement: String,
    /// Case index within the battery.
    pub case: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative slack applied to the disadvantaged side.
    pub slack: f64,
    pub pass: bool,
    /// Hypotheses of the statement were not met; the row is reported but
    /// does not count as a failure.
    pub vacuous: bool,
    pub note: String,
}

impl BoundRow {
    pub fn check(
        statement: impl Into<String>,
        case: usize,
        lhs: f64,
        rhs: f64,
        slack: f64,
        note: impl Into<String>,
    ) -> Self {
        BoundRow {
            statement: statement.into(),
            case,
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs * (1.0 + slack) + 1e-12,
            vacuous: false,
            note: note.into(),
        }
    }

    pub fn vacuous(statement: impl Into<String>, case: usize, note: impl Into<String>) -> Self {
        BoundRow {
            statement: statement.into(),
            case,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: 0.0,
            pass: true,
            vacuous: true,
            note: note.into(),
        }
    }
}

/// A constant fitted from the sample: the smallest value making the
/// statement hold on every generated case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedConstant {
    pub statement: String,
    pub value: f64,
    pub description: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub fitted: Vec<FittedConstant>,
}

impl BoundReport {
    pub fn push(&mut self, row: BoundRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: BoundReport) {
        self.rows.extend(other.rows);
        self.fitted.extend(other.fitted);
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass && !r.vacuous).count()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
