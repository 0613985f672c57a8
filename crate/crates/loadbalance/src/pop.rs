use pop_core::{AllocationMatrix, Decomposable, PartitionPlan, PopError, SplitStrategy, SubSolution};
use pop_lp::Solver;

use crate::model::solve_window;
use crate::{LbError, LbInstance, Server, Shard};

/// One sub-problem: its shards and servers as a standalone instance, the
/// load window it must meet, and the way back to global indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SubInstance {
    pub instance: LbInstance,
    pub window: (f64, f64),
    /// Global index of each local server.
    pub servers: Vec<usize>,
    /// Replication weight of each local shard.
    pub weights: Vec<f64>,
    pub warning: Option<String>,
}

/// Builds sub-problem `sub_index` of a disjoint server partition. The plan's
/// resources are the servers, one unit each.
///
/// The sub-problem's target load is its own mean, but its window is clipped
/// to the global one so that the coalesced map is always globally balanced.
/// A shard whose current server went elsewhere has no placement here and
/// pays for any copy it gets.
pub fn make_sub_instance(
    instance: &LbInstance,
    plan: &PartitionPlan,
    sub_index: usize,
) -> Result<SubInstance, LbError> {
    if plan.strategy != SplitStrategy::DisjointPartition {
        return Err(LbError::Strategy(format!("{:?}", plan.strategy)));
    }
    let shares = plan
        .resource_shares
        .get(sub_index)
        .ok_or_else(|| LbError::Invalid(format!("plan has no sub-problem {sub_index}")))?;
    if shares.len() != instance.servers.len() {
        return Err(LbError::Invalid(format!(
            "plan splits {} resources, instance has {} servers",
            shares.len(),
            instance.servers.len()
        )));
    }
    let servers: Vec<usize> = (0..shares.len()).filter(|&j| shares[j] >= 0.5).collect();
    if servers.is_empty() {
        return Err(LbError::NoServers(sub_index));
    }
    let members = plan.members(sub_index);
    if members.is_empty() {
        return Err(LbError::NoShards(sub_index));
    }
    let weights: Vec<f64> = members.iter().map(|&i| plan.weight(i, sub_index)).collect();
    let shards: Vec<Shard> = members
        .iter()
        .zip(&weights)
        .map(|(&i, &w)| Shard {
            load: instance.shards[i].load * w,
            ..instance.shards[i].clone()
        })
        .collect();
    let local_server = |j: usize| servers.iter().position(|&g| g == j);
    let local_shard = |i: usize| members.iter().position(|&g| g == i);
    let placement = instance
        .placement
        .iter()
        .filter_map(|&(i, j)| Some((local_shard(i)?, local_server(j)?)))
        .collect();
    let eps = instance.tolerance();
    let sub = LbInstance {
        shards,
        servers: servers
            .iter()
            .map(|&j| Server {
                ..instance.servers[j].clone()
            })
            .collect(),
        placement,
        epsilon: Some(eps),
    };
    let global = instance.mean_load();
    let local = sub.mean_load();
    let window = ((local - eps).max(global - eps), (local + eps).min(global + eps));
    let expected = global * servers.len() as f64;
    let actual: f64 = sub.shards.iter().map(|s| s.load).sum();
    let warning = ((actual - expected).abs() > 0.1 * expected).then(|| {
        let msg = format!("sub-problem {sub_index}: load {actual:.3} is more than 10% away from {expected:.3}");
        log::warn!("{msg}");
        msg
    });
    Ok(SubInstance {
        instance: sub,
        window,
        servers,
        weights,
        warning,
    })
}

/// Adapter that lets [`pop_core::solve_pop`] drive the placement policy.
pub struct LbPop<'a> {
    pub instance: &'a LbInstance,
    pub solver: &'a dyn Solver,
}

fn to_pop(err: LbError, index: usize) -> PopError {
    match err {
        LbError::Pop(e) => e,
        LbError::Solver(hint) => PopError::SubproblemInfeasible { index, hint },
        e @ LbError::AggregateMemory { .. } => PopError::SubproblemInfeasible {
            index,
            hint: e.to_string(),
        },
        other => PopError::SubproblemFailed {
            index,
            message: other.to_string(),
        },
    }
}

impl Decomposable for LbPop<'_> {
    type Sub = SubInstance;

    fn num_entities(&self) -> usize {
        self.instance.shards.len()
    }

    fn allocation_width(&self) -> usize {
        self.instance.servers.len()
    }

    fn build_sub(&self, plan: &PartitionPlan, index: usize) -> Result<SubInstance, PopError> {
        make_sub_instance(self.instance, plan, index).map_err(|e| to_pop(e, index))
    }

    fn solve_sub(&self, index: usize, sub: &SubInstance) -> Result<SubSolution, PopError> {
        let sol = solve_window(&sub.instance, sub.window, self.solver).map_err(|e| to_pop(e, index))?;
        let width = self.allocation_width();
        let mut rows = AllocationMatrix::zeros(sub.weights.len(), width);
        for (i, (local, &w)) in sol.map.fractions.iter_rows().zip(&sub.weights).enumerate() {
            for (&j, &r) in sub.servers.iter().zip(local) {
                rows.set(i, j, r * w);
            }
        }
        Ok(SubSolution {
            allocation: rows,
            variables: sol.variables,
            objective: sol.cost,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{generate, GeneratorConfig};
    use pop_core::partition_random;

    fn plan(inst: &LbInstance, k: usize) -> PartitionPlan {
        partition_random(
            &inst.features(),
            &vec![1.0; inst.servers.len()],
            k,
            0,
            SplitStrategy::DisjointPartition,
        )
        .unwrap()
    }

    #[test]
    fn k1_sub_instance_is_the_instance() {
        let inst = generate(
            &GeneratorConfig {
                shards: 10,
                servers: 3,
                ..Default::default()
            },
            2,
        )
        .unwrap();
        let sub = make_sub_instance(&inst, &plan(&inst, 1), 0).unwrap();
        let mut expected = inst.clone();
        expected.epsilon = Some(inst.tolerance());
        assert_eq!(sub.instance, expected);
        let (l, e) = (inst.mean_load(), inst.tolerance());
        assert_eq!(sub.window, (l - e, l + e));
    }

    #[test]
    fn equal_load_halves_keep_the_global_mean() {
        let mut inst = generate(
            &GeneratorConfig {
                shards: 8,
                servers: 4,
                ..Default::default()
            },
            2,
        )
        .unwrap();
        inst.shards.iter_mut().for_each(|s| s.load = 10.0);
        for s in 0..2 {
            let sub = make_sub_instance(&inst, &plan(&inst, 2), s).unwrap();
            assert!((sub.instance.mean_load() - inst.mean_load()).abs() < 1e-12);
            assert!(sub.warning.is_none());
        }
    }

    #[test]
    fn shards_whose_server_left_are_unplaced() {
        let inst = generate(
            &GeneratorConfig {
                shards: 12,
                servers: 4,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        let p = plan(&inst, 2);
        let sub = make_sub_instance(&inst, &p, 0).unwrap();
        let members = p.members(0);
        for (local, &i) in members.iter().enumerate() {
            let home = inst.placement.iter().find(|&&(s, _)| s == i).unwrap().1;
            let here = sub.instance.placement.iter().any(|&(s, _)| s == local);
            assert_eq!(here, sub.servers.contains(&home));
        }
    }

    #[test]
    fn capacity_split_is_refused() {
        let inst = generate(
            &GeneratorConfig {
                shards: 4,
                servers: 2,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        let p = partition_random(&inst.features(), &[1.0, 1.0], 1, 0, SplitStrategy::CapacitySplit).unwrap();
        assert!(matches!(make_sub_instance(&inst, &p, 0), Err(LbError::Strategy(_))));
    }
}
