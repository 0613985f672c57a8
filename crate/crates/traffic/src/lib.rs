//! Traffic engineering as path-based multicommodity flow.
//!
//! Every commodity (a source/sink demand) may use a few precomputed paths.
//! The policy maximises total carried flow subject to demand caps and edge
//! capacities.

mod cspf;
mod demand;
mod error;
mod model;
mod paths;
mod pop;
mod topology;

pub use cspf::cspf_baseline;
pub use demand::{attach_paths, gravity_demands, Commodity, CommodityRecord, DemandConfig};
pub use error::TrafficError;
pub use model::{build_lp, flows_to_json, solve_full, total_flow, verify_feasible, PathLayout, TrafficSolution};
pub use paths::{k_shortest_paths, Path};
pub use pop::{make_sub_instance, TrafficPop};
pub use topology::{generate, Edge, GeneratorConfig, Topology, TrafficInstance, DEFAULT_CAPACITY};
