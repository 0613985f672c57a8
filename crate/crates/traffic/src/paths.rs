use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::Topology;

/// A simple path, as both its node sequence and its edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }

    fn from_nodes(topo: &Topology, nodes: Vec<usize>) -> Self {
        let edges = nodes
            .windows(2)
            .map(|w| topo.edge_between(w[0], w[1]).expect("path follows existing edges"))
            .collect();
        Self { nodes, edges }
    }
}

/// Fewest-hop path from `src` to `dst` avoiding `banned_nodes` and
/// `banned_edges`; among equally short paths, the lexicographically smallest
/// node sequence.
fn shortest(
    topo: &Topology,
    src: usize,
    dst: usize,
    banned_nodes: &[bool],
    banned_edges: &[bool],
) -> Option<Vec<usize>> {
    // Hop distance to dst, then a greedy walk that always takes the smallest
    // neighbour still on some shortest route.
    let n = topo.num_nodes();
    let mut dist = vec![usize::MAX; n];
    dist[dst] = 0;
    let mut queue = VecDeque::from([dst]);
    while let Some(v) = queue.pop_front() {
        for &(u, e) in topo.in_edges(v) {
            if dist[u] == usize::MAX && !banned_nodes[u] && !banned_edges[e] {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if dist[src] == usize::MAX {
        return None;
    }
    let mut path = vec![src];
    let mut at = src;
    while at != dst {
        let &(next, _) = topo
            .out_edges(at)
            .iter()
            .find(|&&(v, e)| !banned_edges[e] && dist[v] != usize::MAX && dist[v] + 1 == dist[at])
            .expect("distance labels lead to dst");
        path.push(next);
        at = next;
    }
    Some(path)
}

/// Up to `k` loopless paths from `src` to `dst` in order of hop count, ties
/// broken by node index sequence (Yen's algorithm). Empty when `dst` is
/// unreachable or `src == dst`.
pub fn k_shortest_paths(topo: &Topology, src: usize, dst: usize, k: usize) -> Vec<Path> {
    if src == dst || k == 0 {
        return Vec::new();
    }
    let mut banned_nodes = vec![false; topo.num_nodes()];
    let mut banned_edges = vec![false; topo.num_edges()];
    let Some(first) = shortest(topo, src, dst, &banned_nodes, &banned_edges) else {
        return Vec::new();
    };
    let mut accepted: Vec<Vec<usize>> = vec![first];
    let mut candidates: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    while accepted.len() < k {
        let prev = accepted.last().expect("non-empty").clone();
        for i in 0..prev.len() - 1 {
            let spur = prev[i];
            let root = &prev[..=i];
            let mut touched = Vec::new();
            for p in &accepted {
                if p.len() > i + 1 && &p[..=i] == root {
                    if let Some(e) = topo.edge_between(p[i], p[i + 1]) {
                        banned_edges[e] = true;
                        touched.push(e);
                    }
                }
            }
            for &v in &root[..i] {
                banned_nodes[v] = true;
            }
            if let Some(tail) = shortest(topo, spur, dst, &banned_nodes, &banned_edges) {
                let mut full = root[..i].to_vec();
                full.extend(tail);
                if !accepted.contains(&full) {
                    candidates.insert((full.len(), full));
                }
            }
            for &v in &root[..i] {
                banned_nodes[v] = false;
            }
            for e in touched {
                banned_edges[e] = false;
            }
        }
        match candidates.pop_first() {
            Some((_, next)) => accepted.push(next),
            None => break,
        }
    }
    accepted
        .into_iter()
        .map(|nodes| Path::from_nodes(topo, nodes))
        .collect()
}
