use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One row: `coeffs · x  relation  rhs`, with `coeffs` as sparse `(var, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProgramError {
    #[error("constraint {row} references variable {var} but the program has {num_vars} variables")]
    VarOutOfRange { row: usize, var: usize, num_vars: usize },
    #[error("variable {var} has lower bound {lo} above upper bound {hi}")]
    InvertedBounds { var: usize, lo: f64, hi: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("integer variable {0} is not a program variable")]
    IntegerOutOfRange(usize),
    #[error("integer variable {0} needs finite bounds")]
    UnboundedInteger(usize),
    #[error("term {0} has a non-positive normalizer")]
    BadNormalizer(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable `(lo, hi)`; infinities are allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            constraints: Vec::new(),
            bounds: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lo, hi));
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(ProgramError::NonFinite("bounds length".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(ProgramError::NonFinite("objective".into()));
        }
        for (var, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(ProgramError::NonFinite(format!("bounds of variable {var}")));
            }
            if lo > hi {
                return Err(ProgramError::InvertedBounds { var, lo, hi });
            }
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(ProgramError::NonFinite(format!("rhs of constraint {row}")));
            }
            for &(var, a) in &c.coeffs {
                if var >= n {
                    return Err(ProgramError::VarOutOfRange { row, var, num_vars: n });
                }
                if !a.is_finite() {
                    return Err(ProgramError::NonFinite(format!("constraint {row}")));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest absolute violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars() && self.max_violation(x) <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    pub integers: BTreeSet<usize>,
}

impl MixedIntegerProgram {
    pub fn new(lp: LinearProgram) -> Self {
        Self {
            lp,
            integers: BTreeSet::new(),
        }
    }

    pub fn mark_integer(&mut self, var: usize) {
        self.integers.insert(var);
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        self.lp.validate()?;
        for &var in &self.integers {
            let Some(&(lo, hi)) = self.lp.bounds.get(var) else {
                return Err(ProgramError::IntegerOutOfRange(var));
            };
            if !lo.is_finite() || !hi.is_finite() {
                return Err(ProgramError::UnboundedInteger(var));
            }
        }
        Ok(())
    }
}
