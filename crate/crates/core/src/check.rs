//! Outcome records shared by every relation verifier.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One verified identity: both sides rendered exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
}

impl Check {
    /// Compare two values and record their rendered forms.
    pub fn compare<T: PartialEq + std::fmt::Display>(name: impl Into<String>, lhs: &T, rhs: &T) -> Check {
        Check {
            name: name.into(),
            status: if lhs == rhs { Status::Pass } else { Status::Fail },
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool, lhs: impl Into<String>, rhs: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    !checks.is_empty() && checks.iter().all(Check::passed)
}
