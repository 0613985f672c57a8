//! The map (parallel sub-problem solves) and reduce (coalescing) steps.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::{AllocationMatrix, PartitionPlan, PopError};

/// A sub-problem's solution. Rows follow [`PartitionPlan::members`] of the
/// sub-problem and are expressed in the original problem's units, so that
/// replicated rows can be summed directly.
#[derive(Debug, Clone)]
pub struct SubSolution {
    pub allocation: AllocationMatrix,
    pub variables: usize,
    pub objective: f64,
}

/// What a domain supplies to be solved through [`solve_pop`].
pub trait Decomposable: Sync {
    type Sub: Send;

    fn num_entities(&self) -> usize;

    /// Width of one allocation row.
    fn allocation_width(&self) -> usize;

    fn build_sub(&self, plan: &PartitionPlan, index: usize) -> Result<Self::Sub, PopError>;

    fn solve_sub(&self, index: usize, sub: &Self::Sub) -> Result<SubSolution, PopError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubStats {
    pub index: usize,
    pub entities: usize,
    pub variables: usize,
    pub objective: f64,
    /// Sub-instance construction plus solve.
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub subproblems: Vec<SubStats>,
    /// Critical path of the map step.
    pub max_sub: Duration,
    /// Serial sum of all sub-problem times.
    pub total_sub: Duration,
    pub coalesce: Duration,
}

impl SolveStats {
    pub fn max_variables(&self) -> usize {
        self.subproblems.iter().map(|s| s.variables).max().unwrap_or(0)
    }
}

/// Solves every sub-problem of `plan`, running at most `parallelism` of them
/// at once, and coalesces the results. The outcome does not depend on
/// completion order. The first failing sub-problem (by index) is reported.
pub fn solve_pop<D: Decomposable>(
    problem: &D,
    plan: &PartitionPlan,
    parallelism: usize,
) -> Result<(AllocationMatrix, SolveStats), PopError> {
    if plan.num_entities() != problem.num_entities() {
        return Err(PopError::DimensionMismatch(format!(
            "plan covers {} entities, problem has {}",
            plan.num_entities(),
            problem.num_entities()
        )));
    }
    let run_one = |index: usize| -> Result<(SubSolution, SubStats), PopError> {
        let start = Instant::now();
        let sub = problem.build_sub(plan, index)?;
        let solution = problem.solve_sub(index, &sub)?;
        let stats = SubStats {
            index,
            entities: solution.allocation.rows(),
            variables: solution.variables,
            objective: solution.objective,
            wall: start.elapsed(),
        };
        Ok((solution, stats))
    };

    let outcomes: Vec<Result<(SubSolution, SubStats), PopError>> = if parallelism <= 1 || plan.k == 1 {
        (0..plan.k).map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| PopError::Domain(format!("cannot start solver pool: {e}")))?;
        pool.install(|| (0..plan.k).into_par_iter().map(run_one).collect())
    };

    let mut allocations = Vec::with_capacity(plan.k);
    let mut subproblems = Vec::with_capacity(plan.k);
    for outcome in outcomes {
        let (solution, stats) = outcome?;
        allocations.push(solution.allocation);
        subproblems.push(stats);
    }

    let start = Instant::now();
    let merged = coalesce(&allocations, plan)?;
    let coalesce_time = start.elapsed();
    let max_sub = subproblems.iter().map(|s| s.wall).max().unwrap_or_default();
    let total_sub = subproblems.iter().map(|s| s.wall).sum();
    Ok((
        merged,
        SolveStats {
            subproblems,
            max_sub,
            total_sub,
            coalesce: coalesce_time,
        },
    ))
}

/// Reduce step: copies each sub-problem's rows back to their entities,
/// summing the rows of replicated entities.
pub fn coalesce(sub_allocations: &[AllocationMatrix], plan: &PartitionPlan) -> Result<AllocationMatrix, PopError> {
    if sub_allocations.len() != plan.k {
        return Err(PopError::DimensionMismatch(format!(
            "{} sub-allocations for k = {}",
            sub_allocations.len(),
            plan.k
        )));
    }
    let width = sub_allocations.first().map_or(0, AllocationMatrix::cols);
    let mut merged = AllocationMatrix::zeros(plan.num_entities(), width);
    for (s, alloc) in sub_allocations.iter().enumerate() {
        let members = plan.members(s);
        if alloc.rows() != members.len() || alloc.cols() != width {
            return Err(PopError::DimensionMismatch(format!(
                "sub-allocation {s} is {}x{}, expected {}x{width}",
                alloc.rows(),
                alloc.cols(),
                members.len()
            )));
        }
        for (r, &e) in members.iter().enumerate() {
            for (dst, src) in merged.row_mut(e).iter_mut().zip(alloc.row(r)) {
                *dst += src;
            }
        }
    }
    Ok(merged)
}
