//! Domain-agnostic machinery for partitioned optimisation.
//!
//! A large allocation problem is split into `k` sub-problems, each holding a
//! subset of the entities and a share of every resource. The sub-problems
//! are solved independently and their allocations are stitched back into one
//! allocation for the original problem.
//!
//! Domains plug in through [`Decomposable`]; this crate owns partitioning
//! ([`partition_random`], [`partition_stratified`], [`partition_skewed`],
//! [`replicate_hot`]), the parallel map step ([`solve_pop`]), the reduce step
//! ([`coalesce`]) and partition diagnostics ([`similarity_report`]).

mod allocation;
mod error;
mod feasibility;
mod features;
mod partition;
mod pipeline;
mod plan;
mod similarity;

pub use allocation::AllocationMatrix;
pub use error::PopError;
pub use feasibility::{FeasibilityReport, Violation};
pub use features::{validate_features, EntityFeatures};
pub use partition::{partition_random, partition_skewed, partition_stratified, replicate_hot};
pub use pipeline::{coalesce, solve_pop, Decomposable, SolveStats, SubSolution, SubStats};
pub use plan::{split_resources, PartitionPlan, SplitStrategy};
pub use similarity::{similarity_report, SimilarityReport, SubDistribution};
