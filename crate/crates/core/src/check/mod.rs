//! Verification of traces and strategies.

mod closure;
mod lasso;
mod trace;

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

pub use closure::verify_strategy_closure;
pub use lasso::{lasso_check, LassoAdversary};
pub use trace::{check_recurrence, check_safety};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("adversary `{0}` has no finite-state model; use the recurrence check instead")]
    AdversaryNotFinite(String),
    #[error("strategy and specification declare different variables")]
    VarMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Init,
    Step(usize),
    Node(usize),
    Strategy,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Init => write!(f, "init"),
            Location::Step(s) => write!(f, "step {s}"),
            Location::Node(n) => write!(f, "node {n}"),
            Location::Strategy => write!(f, "strategy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub at: Location,
    /// Clause text or goal identifier.
    pub item: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verdict {
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// Longest run of goal-free steps plus one, for product checks.
    pub max_gap: Option<usize>,
}

impl Verdict {
    pub fn from_violations(violations: Vec<Violation>) -> Verdict {
        Verdict {
            passed: violations.is_empty(),
            violations,
            max_gap: None,
        }
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        if self.passed {
            out.push_str("PASS\n");
        } else {
            out.push_str(&format!("FAIL ({} violations)\n", self.violations.len()));
        }
        for v in &self.violations {
            out.push_str(&format!("{}: {}: {}\n", v.at, v.item, v.description));
        }
        if let Some(w) = self.max_gap {
            out.push_str(&format!("max goal gap: {w}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let violations: Vec<Value> = self
            .violations
            .iter()
            .map(|v| json!({"at": v.at.to_string(), "item": v.item, "description": v.description}))
            .collect();
        json!({"passed": self.passed, "violations": violations, "max_gap": self.max_gap})
    }
}
