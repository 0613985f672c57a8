//! A small exact solver for the linear and mixed-integer programs used by
//! the allocation domains.
//!
//! [`solve_lp`] runs a bounded-variable revised simplex over a product-form
//! basis inverse. [`solve_milp`] layers best-first branch-and-bound on top,
//! and [`solve_max_min`] applies the epigraph transform to max-min objectives.
//! Everything is reachable through the [`Solver`] trait so callers can swap
//! in another backend.

mod lp_format;
mod maxmin;
mod milp;
mod program;
mod result;
mod simplex;

pub use lp_format::{write_lp, write_milp};
pub use maxmin::{solve_max_min, MaxMinProblem, RatioTerm};
pub use milp::solve_milp;
pub use program::{Constraint, LinearProgram, MixedIntegerProgram, ProgramError, Relation, Sense};
pub use result::{SolveLimits, SolveResult, SolveStatus};
pub use simplex::solve_lp;

/// Pivot magnitudes below this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Bound violations up to this are treated as feasible.
pub const FEAS_TOL: f64 = 1e-7;
/// Distance from an integer below which a value counts as integral.
pub const INT_TOL: f64 = 1e-6;

/// Backend interface for anything that can solve our programs.
pub trait Solver: Send + Sync {
    fn solve_lp(&self, lp: &LinearProgram) -> SolveResult;
    fn solve_milp(&self, mip: &MixedIntegerProgram) -> SolveResult;
}

/// The embedded simplex / branch-and-bound backend.
#[derive(Debug, Clone, Default)]
pub struct SimplexSolver {
    pub limits: SolveLimits,
}

impl SimplexSolver {
    pub fn new(limits: SolveLimits) -> Self {
        Self { limits }
    }
}

impl Solver for SimplexSolver {
    fn solve_lp(&self, lp: &LinearProgram) -> SolveResult {
        solve_lp(lp, &self.limits)
    }

    fn solve_milp(&self, mip: &MixedIntegerProgram) -> SolveResult {
        solve_milp(mip, &self.limits)
    }
}
