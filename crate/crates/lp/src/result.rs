use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration or time limit hit; `primal` holds the last iterate.
    IterationLimit,
    /// Node limit hit before the gap closed; `primal` holds the incumbent, if any.
    GapLimit,
}

#[derive(Debug, Clone)]
pub struct SolveLimits {
    pub max_iterations: u64,
    pub max_nodes: u64,
    /// Relative optimality gap for branch-and-bound.
    pub gap: f64,
    pub time_limit: Option<Duration>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self {
            max_iterations: 5_000_000,
            max_nodes: 200_000,
            gap: 1e-6,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective in the program's own sense. NaN when no point is available.
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Row duals in the program's own sense (empty unless an LP solved to optimality).
    pub duals: Vec<f64>,
    /// Best proven bound (equals `objective` for optimal LPs).
    pub bound: f64,
    pub iterations: u64,
    pub nodes: u64,
    pub elapsed: Duration,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub(crate) fn without_point(status: SolveStatus, iterations: u64, elapsed: Duration) -> Self {
        Self {
            status,
            objective: f64::NAN,
            primal: Vec::new(),
            duals: Vec::new(),
            bound: f64::NAN,
            iterations,
            nodes: 0,
            elapsed,
        }
    }
}
