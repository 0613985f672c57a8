use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{k_shortest_paths, Path, Topology, TrafficError};

/// A routed demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub id: u64,
    pub source: usize,
    pub sink: usize,
    pub demand: f64,
    pub paths: Vec<Path>,
}

/// One line of a commodity file, with endpoints given by node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommodityRecord {
    pub source: String,
    pub sink: String,
    pub demand: f64,
}

impl CommodityRecord {
    pub fn read_all(text: &str) -> Result<Vec<Self>, TrafficError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn resolve(&self, topo: &Topology) -> Result<(usize, usize, f64), TrafficError> {
        let find = |id: &str| topo.node_index(id).ok_or_else(|| TrafficError::UnknownNode(id.into()));
        Ok((find(&self.source)?, find(&self.sink)?, self.demand))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemandConfig {
    pub commodities: usize,
    /// Total demand as a multiple of total edge capacity.
    pub load_factor: f64,
    /// Paths precomputed per commodity.
    pub paths: usize,
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            commodities: 5000,
            load_factor: 2.0,
            paths: 4,
        }
    }
}

/// Gravity-model demands on a seeded sample of distinct ordered node pairs:
/// `demand(s, t)` is proportional to `out_degree(s) * in_degree(t)`, scaled so
/// the total is `load_factor` times the total edge capacity.
pub fn gravity_demands(
    topo: &Topology,
    config: &DemandConfig,
    seed: u64,
) -> Result<Vec<(usize, usize, f64)>, TrafficError> {
    let n = topo.num_nodes();
    let pairs = n * n.saturating_sub(1);
    if config.commodities == 0 || config.commodities > pairs {
        return Err(TrafficError::Graph(format!(
            "cannot draw {} distinct pairs from {n} nodes",
            config.commodities
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, pairs, config.commodities).into_vec();
    picked.sort_unstable();
    let indeg = topo.in_degrees();
    let raw: Vec<(usize, usize, f64)> = picked
        .into_iter()
        .map(|p| {
            let s = p / (n - 1);
            let r = p % (n - 1);
            let t = if r >= s { r + 1 } else { r };
            (s, t, (topo.out_degree(s) * indeg[t]) as f64)
        })
        .collect();
    let total_raw: f64 = raw.iter().map(|r| r.2).sum();
    if total_raw <= 0.0 {
        return Err(TrafficError::Graph("graph has no edges to size demands by".into()));
    }
    let scale = config.load_factor * topo.capacities().iter().sum::<f64>() / total_raw;
    Ok(raw.into_iter().map(|(s, t, w)| (s, t, w * scale)).collect())
}

/// Routes each demand over up to `k` shortest paths. Demands without any
/// path are left out and their ids returned separately.
pub fn attach_paths(
    topo: &Topology,
    demands: &[(usize, usize, f64)],
    k: usize,
) -> Result<(Vec<Commodity>, Vec<u64>), TrafficError> {
    let mut kept = Vec::with_capacity(demands.len());
    let mut dropped = Vec::new();
    for (idx, &(source, sink, demand)) in demands.iter().enumerate() {
        let id = idx as u64;
        if !(demand > 0.0) || !demand.is_finite() {
            return Err(TrafficError::Commodity {
                id,
                reason: format!("demand {demand} must be positive"),
            });
        }
        if source >= topo.num_nodes() || sink >= topo.num_nodes() || source == sink {
            return Err(TrafficError::Commodity {
                id,
                reason: format!("bad endpoints {source} -> {sink}"),
            });
        }
        let paths = k_shortest_paths(topo, source, sink, k);
        if paths.is_empty() {
            log::warn!("commodity {id} ({source} -> {sink}) has no path and is dropped");
            dropped.push(id);
        } else {
            kept.push(Commodity {
                id,
                source,
                sink,
                demand,
                paths,
            });
        }
    }
    Ok((kept, dropped))
}
