//! Query load balancing by shard placement.
//!
//! Shards carry query load and occupy memory. Given where every shard lives
//! today, the policy picks a shard-to-server map (possibly splitting a
//! shard's queries over several copies) so that every server's load is
//! within a tolerance of the mean, memory limits hold, and as little data as
//! possible is copied onto servers that do not already hold it.

mod greedy;
mod instance;
mod model;
mod pop;

pub use greedy::{greedy_baseline, GreedyOutcome};
pub use instance::{generate, hot_shard_instance, GeneratorConfig, LbError, LbInstance, Server, Shard};
pub use model::{build_milp, movement_cost, solve_full, verify_feasible, MilpLayout, ShardMap, INDICATOR_TOL};
pub use pop::{make_sub_instance, LbPop, SubInstance};
