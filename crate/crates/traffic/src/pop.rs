use pop_core::{Decomposable, EntityFeatures, PartitionPlan, PopError, SplitStrategy, SubSolution};
use pop_lp::Solver;

use crate::model::solve_full;
use crate::topology::{generate, GeneratorConfig};
use crate::{attach_paths, gravity_demands, Commodity, DemandConfig, Topology, TrafficError, TrafficInstance};

impl TrafficInstance {
    /// Random topology with gravity demands routed over `demand.paths` paths.
    pub fn generate(topology: &GeneratorConfig, demand: &DemandConfig, seed: u64) -> Result<Self, TrafficError> {
        let topo = generate(topology, seed)?;
        let demands = gravity_demands(&topo, demand, seed.wrapping_add(1))?;
        let (commodities, _) = attach_paths(&topo, &demands, demand.paths)?;
        Ok(Self {
            topology: topo,
            commodities,
        })
    }

    /// Partitioning features: source, sink, demand.
    pub fn features(&self) -> Vec<EntityFeatures> {
        self.commodities
            .iter()
            .map(|c| EntityFeatures::new(c.id, vec![c.source as f64, c.sink as f64, c.demand]))
            .collect()
    }

    pub fn path_slots(&self) -> usize {
        self.commodities.iter().map(|c| c.paths.len()).max().unwrap_or(0)
    }
}

/// The whole network at the sub-problem's capacity share, carrying the
/// sub-problem's commodities. Replicated commodities bring only their
/// weighted part of the demand.
pub fn make_sub_instance(
    topo: &Topology,
    commodities: &[Commodity],
    plan: &PartitionPlan,
    sub_index: usize,
) -> Result<(Topology, Vec<Commodity>), TrafficError> {
    if plan.strategy != SplitStrategy::CapacitySplit {
        return Err(TrafficError::Strategy(format!("{:?}", plan.strategy)));
    }
    let shares = plan
        .resource_shares
        .get(sub_index)
        .ok_or_else(|| TrafficError::Graph(format!("plan has no sub-problem {sub_index}")))?;
    if shares.len() != topo.num_edges() {
        return Err(TrafficError::Graph(format!(
            "plan splits {} resources, graph has {} edges",
            shares.len(),
            topo.num_edges()
        )));
    }
    let subset = plan
        .members(sub_index)
        .into_iter()
        .map(|j| {
            let mut c = commodities[j].clone();
            c.demand *= plan.weight(j, sub_index);
            c
        })
        .collect();
    Ok((topo.with_capacities(shares), subset))
}

/// Adapter that lets [`pop_core::solve_pop`] drive the traffic policy.
pub struct TrafficPop<'a> {
    pub instance: &'a TrafficInstance,
    pub solver: &'a dyn Solver,
}

fn to_pop(err: TrafficError, index: usize) -> PopError {
    match err {
        TrafficError::Pop(e) => e,
        TrafficError::Solver(status) => PopError::SubproblemInfeasible { index, hint: status },
        other => PopError::SubproblemFailed {
            index,
            message: other.to_string(),
        },
    }
}

impl Decomposable for TrafficPop<'_> {
    type Sub = (Topology, Vec<Commodity>);

    fn num_entities(&self) -> usize {
        self.instance.commodities.len()
    }

    fn allocation_width(&self) -> usize {
        self.instance.path_slots()
    }

    fn build_sub(&self, plan: &PartitionPlan, index: usize) -> Result<Self::Sub, PopError> {
        make_sub_instance(&self.instance.topology, &self.instance.commodities, plan, index)
            .map_err(|e| to_pop(e, index))
    }

    fn solve_sub(&self, index: usize, (topo, commodities): &Self::Sub) -> Result<SubSolution, PopError> {
        let sol = solve_full(topo, commodities, self.allocation_width(), self.solver).map_err(|e| to_pop(e, index))?;
        Ok(SubSolution {
            allocation: sol.flows,
            variables: sol.variables,
            objective: sol.total,
        })
    }
}
