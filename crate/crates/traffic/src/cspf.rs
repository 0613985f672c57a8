use pop_core::AllocationMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Commodity, Topology};

/// Constrained shortest path first: commodities in descending demand order
/// (equal demands in seeded random order) each push as much as the residual
/// capacity allows down their paths, shortest first. One pass, no rerouting.
pub fn cspf_baseline(topo: &Topology, commodities: &[Commodity], width: usize, seed: u64) -> AllocationMatrix {
    let width = width.max(commodities.iter().map(|c| c.paths.len()).max().unwrap_or(0));
    let mut order: Vec<usize> = (0..commodities.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by(|&a, &b| commodities[b].demand.total_cmp(&commodities[a].demand));

    let mut residual = topo.capacities();
    let mut flows = AllocationMatrix::zeros(commodities.len(), width);
    for j in order {
        let c = &commodities[j];
        let mut left = c.demand;
        for (p, path) in c.paths.iter().enumerate() {
            if left <= 0.0 {
                break;
            }
            let room = path.edges.iter().map(|&e| residual[e]).fold(f64::INFINITY, f64::min);
            let f = left.min(room);
            if f > 0.0 {
                path.edges
                    .iter()
                    .for_each(|&e| residual[e] = (residual[e] - f).max(0.0));
                flows.set(j, p, f);
                left -= f;
            }
        }
    }
    flows
}
