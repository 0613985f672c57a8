//! Move-the-hottest-shard heuristic in the style of E-Store: no copies are
//! added, whole shares of a shard's queries move from the busiest server to
//! the idlest one that has room.

use crate::model::ShardMap;
use crate::LbInstance;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    pub map: ShardMap,
    /// Number of shard moves made.
    pub moves: usize,
    /// Whether every server ended inside the load window.
    pub balanced: bool,
}

/// Starts from the current placement and, while some server is above the
/// window, moves the hottest shard off the most loaded server onto the least
/// loaded server with memory for it, as long as that lowers the peak of the
/// two. Stops when no such move exists.
pub fn greedy_baseline(instance: &LbInstance) -> GreedyOutcome {
    let mut map = ShardMap::current(instance);
    let (n, m) = (instance.shards.len(), instance.servers.len());
    let (l, eps) = (instance.mean_load(), instance.tolerance());
    let mut loads = map.server_loads(instance);
    let mut used: Vec<f64> = (0..m)
        .map(|j| {
            (0..n)
                .filter(|&i| map.copies[i][j])
                .map(|i| instance.shards[i].memory)
                .sum()
        })
        .collect();
    let mut moves = 0;
    // Every move strictly lowers the sorted load vector, but cap it anyway.
    let limit = 4 * n * m + 16;
    while moves < limit {
        let src = (0..m)
            .max_by(|&a, &b| loads[a].total_cmp(&loads[b]).then(b.cmp(&a)))
            .expect("servers");
        if loads[src] <= l + eps {
            break;
        }
        let mut hot: Vec<usize> = (0..n).filter(|&i| map.fractions.get(i, src) > 0.0).collect();
        hot.sort_by(|&a, &b| {
            let la = map.fractions.get(a, src) * instance.shards[a].load;
            let lb = map.fractions.get(b, src) * instance.shards[b].load;
            lb.total_cmp(&la)
                .then(instance.shards[a].id.cmp(&instance.shards[b].id))
        });
        let mut moved = false;
        for i in hot {
            let shard = &instance.shards[i];
            let share = map.fractions.get(i, src);
            let delta = share * shard.load;
            let target = (0..m)
                .filter(|&j| j != src)
                .filter(|&j| map.copies[i][j] || used[j] + shard.memory <= instance.servers[j].capacity + EPS)
                .min_by(|&a, &b| loads[a].total_cmp(&loads[b]).then(a.cmp(&b)));
            let Some(dst) = target else { continue };
            if (loads[dst] + delta).max(loads[src] - delta) >= loads[src] - EPS {
                continue;
            }
            map.fractions.set(i, src, 0.0);
            map.fractions.set(i, dst, map.fractions.get(i, dst) + share);
            map.copies[i][src] = false;
            used[src] -= shard.memory;
            if !map.copies[i][dst] {
                map.copies[i][dst] = true;
                used[dst] += shard.memory;
            }
            loads[src] -= delta;
            loads[dst] += delta;
            moves += 1;
            moved = true;
            break;
        }
        if !moved {
            break;
        }
    }
    let balanced = loads.iter().all(|&x| x <= l + eps + 1e-6 && x >= l - eps - 1e-6);
    GreedyOutcome { map, moves, balanced }
}
