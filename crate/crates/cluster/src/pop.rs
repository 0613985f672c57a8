use pop_core::{AllocationMatrix, Decomposable, PartitionPlan, PopError, SubSolution};
use pop_lp::Solver;

use crate::instance::{ClusterError, ClusterInstance, ClusterSpec};
use crate::model::solve_full;

/// Jobs of sub-problem `sub_index` on their share of the workers. The
/// normalising allocation is recomputed within the sub-instance.
pub fn make_sub_instance(
    instance: &ClusterInstance,
    plan: &PartitionPlan,
    sub_index: usize,
) -> Result<ClusterInstance, ClusterError> {
    let members = plan.members(sub_index);
    if members.is_empty() {
        return Err(ClusterError::EmptySubInstance(sub_index));
    }
    let shares = plan
        .resource_shares
        .get(sub_index)
        .ok_or_else(|| ClusterError::Invalid(format!("plan has no sub-problem {sub_index}")))?;
    if shares.len() != instance.num_types() {
        return Err(ClusterError::Invalid(format!(
            "plan splits {} resources, cluster has {} types",
            shares.len(),
            instance.num_types()
        )));
    }
    let jobs = members.iter().map(|&m| instance.jobs[m].clone()).collect();
    let sub = ClusterInstance {
        jobs,
        cluster: ClusterSpec {
            types: instance.cluster.types.clone(),
            num_workers: shares.clone(),
        },
    };
    sub.validate()?;
    Ok(sub)
}

/// Adapter that lets [`pop_core::solve_pop`] drive the cluster policy.
///
/// A job replicated into several sub-problems is solved in each and its rows
/// are scaled by the replication weight before coalescing, so the summed row
/// still uses at most one unit of time.
pub struct ClusterPop<'a> {
    pub instance: &'a ClusterInstance,
    pub solver: &'a dyn Solver,
}

fn to_pop(err: ClusterError, index: usize) -> PopError {
    match err {
        ClusterError::Pop(e) => e,
        ClusterError::Solver(status) => PopError::SubproblemInfeasible { index, hint: status },
        other => PopError::SubproblemFailed {
            index,
            message: other.to_string(),
        },
    }
}

impl Decomposable for ClusterPop<'_> {
    type Sub = (ClusterInstance, Vec<usize>, Vec<f64>);

    fn num_entities(&self) -> usize {
        self.instance.jobs.len()
    }

    fn allocation_width(&self) -> usize {
        self.instance.num_types()
    }

    fn build_sub(&self, plan: &PartitionPlan, index: usize) -> Result<Self::Sub, PopError> {
        let sub = make_sub_instance(self.instance, plan, index).map_err(|e| to_pop(e, index))?;
        let members = plan.members(index);
        let weights = members.iter().map(|&m| plan.weight(m, index)).collect();
        Ok((sub, members, weights))
    }

    fn solve_sub(&self, index: usize, (sub, _, weights): &Self::Sub) -> Result<SubSolution, PopError> {
        let solution = solve_full(sub, self.solver).map_err(|e| to_pop(e, index))?;
        let mut rows: Vec<Vec<f64>> = solution.allocation.iter_rows().map(<[f64]>::to_vec).collect();
        for (row, &w) in rows.iter_mut().zip(weights) {
            if w != 1.0 {
                row.iter_mut().for_each(|v| *v *= w);
            }
        }
        Ok(SubSolution {
            allocation: AllocationMatrix::from_rows(rows, sub.num_types()),
            variables: solution.variables,
            objective: solution.objective,
        })
    }
}
