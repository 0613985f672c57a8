use serde::{Deserialize, Serialize};

/// One violated constraint and by how much it is exceeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub excess: f64,
}

/// Result of checking an allocation against a domain's constraints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records a violation when `excess` is above `tol`.
    pub fn check(&mut self, excess: f64, tol: f64, constraint: impl FnOnce() -> String) {
        if excess > tol || excess.is_nan() {
            self.violations.push(Violation {
                constraint: constraint(),
                excess,
            });
        }
    }

    pub fn worst(&self) -> f64 {
        self.violations.iter().map(|v| v.excess).fold(0.0, f64::max)
    }
}
