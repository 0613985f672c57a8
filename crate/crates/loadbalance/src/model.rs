use pop_core::{AllocationMatrix, FeasibilityReport};
use pop_lp::{LinearProgram, MixedIntegerProgram, Relation, Sense, SolveStatus, Solver};

use crate::{LbError, LbInstance};

/// Fractions at or below this are treated as "no copy".
pub const INDICATOR_TOL: f64 = 1e-6;

/// Column layout: query fractions first, then copy indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MilpLayout {
    pub shards: usize,
    pub servers: usize,
}

impl MilpLayout {
    pub fn fraction(&self, shard: usize, server: usize) -> usize {
        shard * self.servers + server
    }

    pub fn copy(&self, shard: usize, server: usize) -> usize {
        self.shards * self.servers + shard * self.servers + server
    }
}

/// Minimise the memory copied onto servers that do not already host a shard.
/// Every server's load must land in `window`, every shard's queries are fully
/// served, copies fit in memory, and a server can only serve a shard it
/// holds a copy of.
pub fn build_milp(instance: &LbInstance, window: (f64, f64)) -> Result<(MixedIntegerProgram, MilpLayout), LbError> {
    instance.validate()?;
    instance.check_memory()?;
    let (n, m) = (instance.shards.len(), instance.servers.len());
    let layout = MilpLayout { shards: n, servers: m };
    let hosted = instance.hosted();
    let mut lp = LinearProgram::new(Sense::Minimize);
    for _ in 0..n * m {
        lp.add_var(0.0, 0.0, 1.0);
    }
    for (i, shard) in instance.shards.iter().enumerate() {
        for j in 0..m {
            let cost = if hosted[i][j] { 0.0 } else { shard.memory };
            lp.add_var(cost, 0.0, 1.0);
        }
    }
    for j in 0..m {
        let row: Vec<(usize, f64)> = instance
            .shards
            .iter()
            .enumerate()
            .filter(|(_, s)| s.load > 0.0)
            .map(|(i, s)| (layout.fraction(i, j), s.load))
            .collect();
        lp.add_constraint(row.clone(), Relation::Ge, window.0);
        lp.add_constraint(row, Relation::Le, window.1);
    }
    for i in 0..n {
        lp.add_constraint(
            (0..m).map(|j| (layout.fraction(i, j), 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
    }
    for (j, server) in instance.servers.iter().enumerate() {
        let row = instance
            .shards
            .iter()
            .enumerate()
            .map(|(i, s)| (layout.copy(i, j), s.memory))
            .collect();
        lp.add_constraint(row, Relation::Le, server.capacity);
    }
    // A server can take at most `window.1 / load` of a shard, which is a
    // tighter link than `r <= r'` for hot shards.
    for (i, shard) in instance.shards.iter().enumerate() {
        let reach = if shard.load > 0.0 {
            (window.1.max(0.0) / shard.load).min(1.0)
        } else {
            1.0
        };
        for j in 0..m {
            lp.add_constraint(
                vec![(layout.fraction(i, j), 1.0), (layout.copy(i, j), -reach)],
                Relation::Le,
                0.0,
            );
        }
    }
    // No copy can take more than the window's top, so a hot shard needs at
    // least this many copies. Implied fractionally, but not its rounding.
    if window.1 > 0.0 {
        for (i, shard) in instance.shards.iter().enumerate() {
            let needed = (shard.load / window.1 - 1e-9).ceil();
            if needed > 1.0 {
                lp.add_constraint((0..m).map(|j| (layout.copy(i, j), 1.0)).collect(), Relation::Ge, needed);
            }
        }
    }
    let mut mip = MixedIntegerProgram::new(lp);
    for i in 0..n {
        for j in 0..m {
            mip.mark_integer(layout.copy(i, j));
        }
    }
    Ok((mip, layout))
}

/// Query fractions and the copies they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardMap {
    pub fractions: AllocationMatrix,
    pub copies: Vec<Vec<bool>>,
}

impl ShardMap {
    /// Derives copies from fractions above [`INDICATOR_TOL`]; smaller
    /// fractions are zeroed.
    pub fn from_fractions(mut fractions: AllocationMatrix) -> Self {
        let copies = (0..fractions.rows())
            .map(|i| {
                fractions
                    .row_mut(i)
                    .iter_mut()
                    .map(|v| {
                        if *v > INDICATOR_TOL {
                            true
                        } else {
                            *v = 0.0;
                            false
                        }
                    })
                    .collect()
            })
            .collect();
        Self { fractions, copies }
    }

    /// Every shard served where it lives now, split evenly over its copies.
    pub fn current(instance: &LbInstance) -> Self {
        let hosted = instance.hosted();
        let rows = hosted
            .iter()
            .map(|row| {
                let count = row.iter().filter(|&&h| h).count() as f64;
                row.iter().map(|&h| if h { 1.0 / count } else { 0.0 }).collect()
            })
            .collect();
        Self::from_fractions(AllocationMatrix::from_rows(rows, instance.servers.len()))
    }

    pub fn server_loads(&self, instance: &LbInstance) -> Vec<f64> {
        let mut loads = vec![0.0; instance.servers.len()];
        for (shard, row) in instance.shards.iter().zip(self.fractions.iter_rows()) {
            for (l, r) in loads.iter_mut().zip(row) {
                *l += r * shard.load;
            }
        }
        loads
    }
}

/// Memory copied onto servers that did not hold the shard before.
pub fn movement_cost(instance: &LbInstance, map: &ShardMap) -> f64 {
    let hosted = instance.hosted();
    instance
        .shards
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (0..instance.servers.len())
                .filter(|&j| map.copies[i][j] && !hosted[i][j])
                .count() as f64
                * s.memory
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct LbSolution {
    pub map: ShardMap,
    pub cost: f64,
    pub variables: usize,
}

pub(crate) fn solve_window(
    instance: &LbInstance,
    window: (f64, f64),
    solver: &dyn Solver,
) -> Result<LbSolution, LbError> {
    if window.0 > window.1 {
        return Err(LbError::Solver(format!(
            "empty load window [{:.4}, {:.4}]; consider replicating hot shards",
            window.0, window.1
        )));
    }
    let (mip, layout) = build_milp(instance, window)?;
    let result = solver.solve_milp(&mip);
    if result.status != SolveStatus::Optimal {
        return Err(LbError::Solver(format!("{:?}", result.status)));
    }
    let rows = (0..layout.shards)
        .map(|i| {
            (0..layout.servers)
                .map(|j| result.primal[layout.fraction(i, j)].clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    let map = ShardMap::from_fractions(AllocationMatrix::from_rows(rows, layout.servers));
    Ok(LbSolution {
        cost: movement_cost(instance, &map),
        map,
        variables: mip.lp.num_vars(),
    })
}

/// Solves the whole instance against the window `[L - eps, L + eps]`.
pub fn solve_full(instance: &LbInstance, solver: &dyn Solver) -> Result<LbSolution, LbError> {
    let (l, eps) = (instance.mean_load(), instance.tolerance());
    solve_window(instance, (l - eps, l + eps), solver)
}

/// Checks the global load window, full service of every shard, memory and
/// copy consistency, all at 1e-6.
pub fn verify_feasible(instance: &LbInstance, map: &ShardMap) -> FeasibilityReport {
    const TOL: f64 = 1e-6;
    let mut report = FeasibilityReport::default();
    let (n, m) = (instance.shards.len(), instance.servers.len());
    if map.fractions.rows() != n || map.fractions.cols() != m || map.copies.len() != n {
        report.check(f64::INFINITY, TOL, || "map shape does not match the instance".into());
        return report;
    }
    let (l, eps) = (instance.mean_load(), instance.tolerance());
    for (j, load) in map.server_loads(instance).into_iter().enumerate() {
        let id = instance.servers[j].id;
        report.check(load - (l + eps), TOL, || {
            format!("server {id}: load {load:.6} above {:.6}", l + eps)
        });
        report.check((l - eps) - load, TOL, || {
            format!("server {id}: load {load:.6} below {:.6}", l - eps)
        });
    }
    for (i, (shard, row)) in instance.shards.iter().zip(map.fractions.iter_rows()).enumerate() {
        let served: f64 = row.iter().sum();
        report.check((served - 1.0).abs(), TOL, || {
            format!("shard {}: serves {served:.6} of its queries", shard.id)
        });
        for (j, &r) in row.iter().enumerate() {
            report.check(-r, TOL, || format!("shard {} server {j}: negative fraction", shard.id));
            report.check(r - 1.0, TOL, || {
                format!("shard {} server {j}: fraction above 1", shard.id)
            });
            if r > INDICATOR_TOL && !map.copies[i][j] {
                report.check(r, TOL, || {
                    format!("shard {} served by server {j} without a copy", shard.id)
                });
            }
        }
    }
    for (j, server) in instance.servers.iter().enumerate() {
        let used: f64 = instance
            .shards
            .iter()
            .enumerate()
            .filter(|&(i, _)| map.copies[i][j])
            .map(|(_, s)| s.memory)
            .sum();
        report.check(used - server.capacity, TOL, || {
            format!("server {}: memory {used:.6} above {}", server.id, server.capacity)
        });
    }
    report
}
