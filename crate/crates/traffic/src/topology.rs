use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::TrafficError;

/// Capacity assumed for edges whose GraphML carries none.
pub const DEFAULT_CAPACITY: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub capacity: f64,
}

/// A directed capacitated graph. Edges are kept sorted by `(src, dst)` and
/// parallel edges are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub node_ids: Vec<String>,
    pub edges: Vec<Edge>,
    #[serde(skip)]
    out: Vec<Vec<(usize, usize)>>,
    #[serde(skip)]
    inc: Vec<Vec<(usize, usize)>>,
    #[serde(skip)]
    default_capacity_used: usize,
}

impl Topology {
    /// Builds a topology from directed `(src, dst, capacity)` triples.
    /// Self-loops are dropped and parallel edges summed.
    pub fn from_directed(
        node_ids: Vec<String>,
        arcs: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, TrafficError> {
        let n = node_ids.len();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (src, dst, capacity) in arcs {
            if src >= n || dst >= n {
                return Err(TrafficError::Graph(format!("edge {src}->{dst} outside {n} nodes")));
            }
            if !(capacity >= 0.0) || !capacity.is_finite() {
                return Err(TrafficError::Graph(format!(
                    "edge {src}->{dst} has capacity {capacity}"
                )));
            }
            if src != dst {
                *merged.entry((src, dst)).or_insert(0.0) += capacity;
            }
        }
        let edges = merged
            .into_iter()
            .map(|((src, dst), capacity)| Edge { src, dst, capacity })
            .collect();
        Ok(Self::with_edges(node_ids, edges))
    }

    /// Same as [`Topology::from_directed`] but each pair is used both ways.
    pub fn from_undirected(
        node_ids: Vec<String>,
        links: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, TrafficError> {
        let arcs: Vec<_> = links.into_iter().flat_map(|(a, b, c)| [(a, b, c), (b, a, c)]).collect();
        Self::from_directed(node_ids, arcs)
    }

    fn with_edges(node_ids: Vec<String>, edges: Vec<Edge>) -> Self {
        let mut out = vec![Vec::new(); node_ids.len()];
        let mut inc = vec![Vec::new(); node_ids.len()];
        // Edges are sorted by (src, dst), so each list is sorted by neighbour.
        for (e, edge) in edges.iter().enumerate() {
            out[edge.src].push((edge.dst, e));
            inc[edge.dst].push((edge.src, e));
        }
        Self {
            node_ids,
            edges,
            out,
            inc,
            default_capacity_used: 0,
        }
    }

    /// Restores the adjacency index after deserialising.
    pub fn reindex(self) -> Self {
        Self::with_edges(self.node_ids, self.edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `(neighbour, edge index)` pairs, sorted by neighbour.
    pub fn out_edges(&self, node: usize) -> &[(usize, usize)] {
        &self.out[node]
    }

    /// `(predecessor, edge index)` pairs, sorted by predecessor.
    pub fn in_edges(&self, node: usize) -> &[(usize, usize)] {
        &self.inc[node]
    }

    pub fn edge_between(&self, src: usize, dst: usize) -> Option<usize> {
        let out = &self.out[src];
        out.binary_search_by_key(&dst, |&(v, _)| v).ok().map(|i| out[i].1)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out[node].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes()];
        for e in &self.edges {
            deg[e.dst] += 1;
        }
        deg
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.capacity).collect()
    }

    pub fn with_capacities(&self, capacities: &[f64]) -> Self {
        let mut topo = self.clone();
        for (e, &c) in topo.edges.iter_mut().zip(capacities) {
            e.capacity = c;
        }
        topo
    }

    /// How many input edges fell back to [`DEFAULT_CAPACITY`] when loading.
    pub fn default_capacity_used(&self) -> usize {
        self.default_capacity_used
    }

    /// Parses GraphML. Undirected edges become two directed edges; an edge
    /// attribute named `capacity` sets the capacity, otherwise
    /// [`DEFAULT_CAPACITY`] is used.
    pub fn from_graphml(text: &str) -> Result<Self, TrafficError> {
        let doc = roxmltree::Document::parse(text)?;
        let capacity_keys: Vec<&str> = doc
            .descendants()
            .filter(|n| n.has_tag_name("key"))
            .filter(|n| n.attribute("for").is_none_or(|f| f == "edge" || f == "all"))
            .filter(|n| {
                n.attribute("attr.name")
                    .is_some_and(|a| a.eq_ignore_ascii_case("capacity"))
            })
            .filter_map(|n| n.attribute("id"))
            .collect();
        let graph = doc
            .descendants()
            .find(|n| n.has_tag_name("graph"))
            .ok_or_else(|| TrafficError::Graph("no <graph> element".into()))?;
        let default_directed = graph.attribute("edgedefault") == Some("directed");

        let mut node_ids = Vec::new();
        let mut index = HashMap::new();
        for node in graph.children().filter(|n| n.has_tag_name("node")) {
            let id = node
                .attribute("id")
                .ok_or_else(|| TrafficError::Graph("node without id".into()))?;
            if index.insert(id.to_string(), node_ids.len()).is_some() {
                return Err(TrafficError::Graph(format!("duplicate node id {id:?}")));
            }
            node_ids.push(id.to_string());
        }
        let lookup = |id: Option<&str>| -> Result<usize, TrafficError> {
            let id = id.ok_or_else(|| TrafficError::Graph("edge without endpoint".into()))?;
            index
                .get(id)
                .copied()
                .ok_or_else(|| TrafficError::UnknownNode(id.into()))
        };

        let mut arcs = Vec::new();
        let mut defaulted = 0;
        for edge in graph.children().filter(|n| n.has_tag_name("edge")) {
            let src = lookup(edge.attribute("source"))?;
            let dst = lookup(edge.attribute("target"))?;
            let directed = match edge.attribute("directed") {
                Some(d) => d == "true",
                None => default_directed,
            };
            let capacity = edge
                .children()
                .filter(|d| d.has_tag_name("data"))
                .find(|d| d.attribute("key").is_some_and(|k| capacity_keys.contains(&k)))
                .and_then(|d| d.text())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| TrafficError::Graph(format!("bad capacity {t:?}")))
                })
                .transpose()?;
            let capacity = capacity.unwrap_or_else(|| {
                defaulted += 1;
                DEFAULT_CAPACITY
            });
            arcs.push((src, dst, capacity));
            if !directed {
                arcs.push((dst, src, capacity));
            }
        }
        let mut topo = Self::from_directed(node_ids, arcs)?;
        topo.default_capacity_used = defaulted;
        Ok(topo)
    }

    pub fn load_graphml(path: &std::path::Path) -> Result<Self, TrafficError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| TrafficError::Graph(format!("{}: {e}", path.display())))?;
        Self::from_graphml(&text)
    }
}

/// Settings for random topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub nodes: usize,
    /// Undirected links, each becoming two directed edges.
    pub links: usize,
    /// Link capacities are drawn uniformly from this list.
    pub capacities: Vec<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            nodes: 100,
            links: 150,
            capacities: vec![500.0, 1000.0, 2000.0],
        }
    }
}

/// Connected random topology: a random spanning tree plus extra random links.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<Topology, TrafficError> {
    let n = config.nodes;
    if n < 2 {
        return Err(TrafficError::Graph("need at least two nodes".into()));
    }
    let max_links = n * (n - 1) / 2;
    if config.links < n - 1 || config.links > max_links {
        return Err(TrafficError::Graph(format!(
            "{} links cannot connect {n} nodes simply",
            config.links
        )));
    }
    if config.capacities.is_empty() {
        return Err(TrafficError::Graph("no capacities to draw from".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        links.insert((u, v));
    }
    while links.len() < config.links {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            links.insert((a.min(b), a.max(b)));
        }
    }
    let ids = (0..n).map(|i| i.to_string()).collect();
    let caps = &config.capacities;
    let triples: Vec<_> = links
        .into_iter()
        .map(|(a, b)| (a, b, caps[rng.gen_range(0..caps.len())]))
        .collect();
    Topology::from_undirected(ids, triples)
}

/// A topology together with its routed commodities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficInstance {
    pub topology: Topology,
    pub commodities: Vec<crate::Commodity>,
}

impl TrafficInstance {
    /// Reads an instance written by [`TrafficInstance::to_json`], checking
    /// that every path runs over existing edges.
    pub fn from_json(text: &str) -> Result<Self, TrafficError> {
        let raw: Self = serde_json::from_str(text)?;
        let inst = Self {
            topology: raw.topology.reindex(),
            commodities: raw.commodities,
        };
        let edges = inst.topology.num_edges();
        for c in &inst.commodities {
            if c.paths.iter().flat_map(|p| &p.edges).any(|&e| e >= edges) {
                return Err(TrafficError::Commodity {
                    id: c.id,
                    reason: "path uses an unknown edge".into(),
                });
            }
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String, TrafficError> {
        Ok(serde_json::to_string(self)?)
    }

    /// GraphML topology plus a JSON list of `(source, sink, demand)`
    /// records, each routed over up to `paths` shortest paths. Unroutable
    /// commodities are dropped with a warning.
    pub fn from_files(
        graphml: &std::path::Path,
        commodities: &std::path::Path,
        paths: usize,
    ) -> Result<Self, TrafficError> {
        let topology = Topology::load_graphml(graphml)?;
        let text = std::fs::read_to_string(commodities)
            .map_err(|e| TrafficError::Graph(format!("cannot read {}: {e}", commodities.display())))?;
        let demands = crate::CommodityRecord::read_all(&text)?
            .iter()
            .map(|r| r.resolve(&topology))
            .collect::<Result<Vec<_>, _>>()?;
        let (commodities, dropped) = crate::attach_paths(&topology, &demands, paths)?;
        if !dropped.is_empty() {
            log::warn!("{} commodities have no path and were dropped", dropped.len());
        }
        Ok(Self { topology, commodities })
    }
}
