use pop_core::{AllocationMatrix, FeasibilityReport};
use pop_lp::{LinearProgram, MaxMinProblem, RatioTerm, Relation, Sense, SolveStatus, Solver};

use crate::instance::{ClusterError, ClusterInstance};

/// Maps (job, type) to an LP column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocationLayout {
    pub jobs: usize,
    pub types: usize,
}

impl AllocationLayout {
    pub fn of(instance: &ClusterInstance) -> Self {
        Self {
            jobs: instance.jobs.len(),
            types: instance.num_types(),
        }
    }

    pub fn var(&self, job: usize, ty: usize) -> usize {
        job * self.types + ty
    }

    pub fn num_vars(&self) -> usize {
        self.jobs * self.types
    }

    pub fn to_matrix(&self, x: &[f64]) -> AllocationMatrix {
        let rows = (0..self.jobs)
            .map(|m| (0..self.types).map(|j| x[self.var(m, j)].clamp(0.0, 1.0)).collect())
            .collect();
        AllocationMatrix::from_rows(rows, self.types)
    }
}

/// Builds the max-min program over `X`: every `X_mj` in [0, 1], each job's
/// row sums to at most 1, and each type's weighted use `sum_m z_m X_mj`
/// stays within its workers.
pub fn build_lp(instance: &ClusterInstance) -> Result<MaxMinProblem, ClusterError> {
    instance.validate()?;
    let normalizers = instance.equal_share_throughputs()?;
    let layout = AllocationLayout::of(instance);
    let mut base = LinearProgram::new(Sense::Maximize);
    for _ in 0..layout.num_vars() {
        base.add_var(0.0, 0.0, 1.0);
    }
    for m in 0..layout.jobs {
        let row = (0..layout.types).map(|j| (layout.var(m, j), 1.0)).collect();
        base.add_constraint(row, Relation::Le, 1.0);
    }
    for (j, &workers) in instance.cluster.num_workers.iter().enumerate() {
        let row = instance
            .jobs
            .iter()
            .enumerate()
            .map(|(m, job)| (layout.var(m, j), job.gpu_request as f64))
            .collect();
        base.add_constraint(row, Relation::Le, workers);
    }
    let terms = instance
        .jobs
        .iter()
        .zip(normalizers)
        .enumerate()
        .map(|(m, (job, norm))| {
            let scale = job.gpu_request as f64 / job.priority;
            let coeffs = job
                .throughputs
                .iter()
                .enumerate()
                .filter(|(_, &t)| t > 0.0)
                .map(|(j, &t)| (layout.var(m, j), scale * t))
                .collect();
            RatioTerm {
                coeffs,
                normalizer: norm,
            }
        })
        .collect();
    Ok(MaxMinProblem { base, terms })
}

#[derive(Debug, Clone)]
pub struct ClusterSolution {
    pub allocation: AllocationMatrix,
    /// Smallest normalised throughput.
    pub objective: f64,
    pub variables: usize,
}

/// Per-job `(z/w) * throughput(X) / throughput(X_equal)` under `instance`'s
/// own normalisers.
pub fn normalized_throughputs(instance: &ClusterInstance, x: &AllocationMatrix) -> Result<Vec<f64>, ClusterError> {
    let norms = instance.equal_share_throughputs()?;
    Ok(instance
        .jobs
        .iter()
        .zip(norms)
        .zip(x.iter_rows())
        .map(|((job, norm), row)| {
            let thr: f64 = job.throughputs.iter().zip(row).map(|(t, v)| t * v).sum();
            job.gpu_request as f64 / job.priority * thr / norm
        })
        .collect())
}

/// Max-min objective of `x` on `instance`.
pub fn objective(instance: &ClusterInstance, x: &AllocationMatrix) -> Result<f64, ClusterError> {
    Ok(normalized_throughputs(instance, x)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

pub fn solve_full(instance: &ClusterInstance, solver: &dyn Solver) -> Result<ClusterSolution, ClusterError> {
    let problem = build_lp(instance)?;
    let lp = problem.epigraph().map_err(|e| ClusterError::Invalid(e.to_string()))?;
    let result = solver.solve_lp(&lp);
    if result.status != SolveStatus::Optimal {
        return Err(ClusterError::Solver(format!("{:?}", result.status)));
    }
    let layout = AllocationLayout::of(instance);
    let allocation = layout.to_matrix(&result.primal);
    Ok(ClusterSolution {
        objective: objective(instance, &allocation)?,
        allocation,
        variables: lp.num_vars(),
    })
}

/// Checks bounds, per-job time and per-type capacity at 1e-6.
pub fn verify_feasible(instance: &ClusterInstance, x: &AllocationMatrix) -> FeasibilityReport {
    const TOL: f64 = 1e-6;
    let mut report = FeasibilityReport::default();
    let types = instance.num_types();
    if x.rows() != instance.jobs.len() || x.cols() != types {
        report.check(f64::INFINITY, TOL, || {
            format!("shape {}x{} != {}x{}", x.rows(), x.cols(), instance.jobs.len(), types)
        });
        return report;
    }
    for (m, (job, row)) in instance.jobs.iter().zip(x.iter_rows()).enumerate() {
        for (j, &v) in row.iter().enumerate() {
            report.check(-v, TOL, || format!("job {} type {j}: negative allocation", job.id));
            report.check(v - 1.0, TOL, || format!("job {} type {j}: allocation above 1", job.id));
        }
        let total: f64 = row.iter().sum();
        report.check(total - 1.0, TOL, || {
            format!("job {} (row {m}): time share {total:.6} above 1", job.id)
        });
    }
    for j in 0..types {
        let used: f64 = instance
            .jobs
            .iter()
            .enumerate()
            .map(|(m, job)| x.get(m, j) * job.gpu_request as f64)
            .sum();
        let cap = instance.cluster.num_workers[j];
        report.check(used - cap, TOL, || {
            format!("type {}: {used:.6} workers used of {cap}", instance.cluster.types[j])
        });
    }
    report
}
