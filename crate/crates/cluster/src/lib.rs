//! Max-min fair allocation of heterogeneous accelerators to jobs.
//!
//! Each job `m` has a priority `w_m`, asks for `z_m` workers, and runs at
//! throughput `T_mj` on one worker of type `j`. An allocation `X` gives every
//! job a fraction of time on each type. The policy maximises the smallest
//! `(z_m / w_m) * throughput(m, X) / throughput(m, X_equal)` subject to
//! per-job time and per-type worker capacity.

mod baseline;
mod instance;
mod model;
mod pop;

pub use baseline::greedy_baseline;
pub use instance::{generate, ClusterError, ClusterInstance, ClusterSpec, GeneratorConfig, Job};
pub use model::{
    build_lp, normalized_throughputs, objective, solve_full, verify_feasible, AllocationLayout, ClusterSolution,
};
pub use pop::{make_sub_instance, ClusterPop};
