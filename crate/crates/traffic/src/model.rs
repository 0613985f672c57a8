use std::collections::BTreeMap;

use pop_core::{AllocationMatrix, FeasibilityReport};
use pop_lp::{LinearProgram, Relation, Sense, SolveStatus, Solver};

use crate::{Commodity, Topology, TrafficError};

/// Column of each (commodity, path) pair in the LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLayout {
    offsets: Vec<usize>,
}

impl PathLayout {
    pub fn of(commodities: &[Commodity]) -> Self {
        let mut offsets = Vec::with_capacity(commodities.len() + 1);
        offsets.push(0);
        for c in commodities {
            offsets.push(offsets.last().copied().unwrap_or(0) + c.paths.len());
        }
        Self { offsets }
    }

    pub fn var(&self, commodity: usize, path: usize) -> usize {
        self.offsets[commodity] + path
    }

    pub fn num_vars(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Per-commodity path flows, padded with zeros to `width` columns.
    pub fn to_matrix(&self, x: &[f64], width: usize) -> AllocationMatrix {
        let rows = self
            .offsets
            .windows(2)
            .map(|w| {
                let mut row: Vec<f64> = x[w[0]..w[1]].iter().map(|v| v.max(0.0)).collect();
                row.resize(width, 0.0);
                row
            })
            .collect();
        AllocationMatrix::from_rows(rows, width)
    }
}

/// Maximise total flow over path flows, with each commodity capped at its
/// demand and each edge at its capacity.
pub fn build_lp(topo: &Topology, commodities: &[Commodity]) -> (LinearProgram, PathLayout) {
    let layout = PathLayout::of(commodities);
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut per_edge: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (j, c) in commodities.iter().enumerate() {
        for (p, path) in c.paths.iter().enumerate() {
            let v = lp.add_var(1.0, 0.0, c.demand);
            debug_assert_eq!(v, layout.var(j, p));
            for &e in &path.edges {
                per_edge.entry(e).or_default().push((v, 1.0));
            }
        }
        // A single path is already capped by its variable bound.
        if c.paths.len() > 1 {
            let row = (0..c.paths.len()).map(|p| (layout.var(j, p), 1.0)).collect();
            lp.add_constraint(row, Relation::Le, c.demand);
        }
    }
    for (e, row) in per_edge {
        lp.add_constraint(row, Relation::Le, topo.edges[e].capacity);
    }
    (lp, layout)
}

#[derive(Debug, Clone)]
pub struct TrafficSolution {
    /// One row per commodity, one column per path slot.
    pub flows: AllocationMatrix,
    pub total: f64,
    pub variables: usize,
}

pub fn total_flow(flows: &AllocationMatrix) -> f64 {
    flows.values().iter().sum()
}

fn max_paths(commodities: &[Commodity]) -> usize {
    commodities.iter().map(|c| c.paths.len()).max().unwrap_or(0)
}

/// Solves the full problem; `width` pads rows to a common number of path
/// slots (at least the longest path list).
pub fn solve_full(
    topo: &Topology,
    commodities: &[Commodity],
    width: usize,
    solver: &dyn Solver,
) -> Result<TrafficSolution, TrafficError> {
    let (lp, layout) = build_lp(topo, commodities);
    let result = solver.solve_lp(&lp);
    if result.status != SolveStatus::Optimal {
        return Err(TrafficError::Solver(format!("{:?}", result.status)));
    }
    let flows = layout.to_matrix(&result.primal, width.max(max_paths(commodities)));
    Ok(TrafficSolution {
        total: total_flow(&flows),
        flows,
        variables: lp.num_vars(),
    })
}

/// Checks nonnegativity, demand caps, unused path slots and edge capacities
/// at 1e-6.
pub fn verify_feasible(topo: &Topology, commodities: &[Commodity], flows: &AllocationMatrix) -> FeasibilityReport {
    const TOL: f64 = 1e-6;
    let mut report = FeasibilityReport::default();
    if flows.rows() != commodities.len() {
        report.check(f64::INFINITY, TOL, || {
            format!("{} flow rows for {} commodities", flows.rows(), commodities.len())
        });
        return report;
    }
    let mut load = vec![0.0; topo.num_edges()];
    for (c, row) in commodities.iter().zip(flows.iter_rows()) {
        for (p, &f) in row.iter().enumerate() {
            report.check(-f, TOL, || format!("commodity {} path {p}: negative flow", c.id));
            match c.paths.get(p) {
                Some(path) => path.edges.iter().for_each(|&e| load[e] += f),
                None => report.check(f.abs(), TOL, || {
                    format!("commodity {} path {p}: flow on missing path", c.id)
                }),
            }
        }
        let carried: f64 = row.iter().sum();
        report.check(carried - c.demand, TOL, || {
            format!("commodity {}: {carried:.6} above demand {}", c.id, c.demand)
        });
    }
    for (e, (l, edge)) in load.iter().zip(&topo.edges).enumerate() {
        report.check(l - edge.capacity, TOL, || {
            format!(
                "edge {e} ({} -> {}): load {l:.6} above capacity {}",
                edge.src, edge.dst, edge.capacity
            )
        });
    }
    report
}

/// Flows keyed by commodity id, then path index.
pub fn flows_to_json(commodities: &[Commodity], flows: &AllocationMatrix) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = commodities
        .iter()
        .zip(flows.iter_rows())
        .map(|(c, row)| {
            let per_path: serde_json::Map<String, serde_json::Value> =
                (0..c.paths.len()).map(|p| (p.to_string(), row[p].into())).collect();
            (c.id.to_string(), per_path.into())
        })
        .collect();
    map.into()
}
