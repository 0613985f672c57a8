use pop_core::{EntityFeatures, PopError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LbError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("total shard memory {needed} exceeds total server memory {available}")]
    AggregateMemory { needed: f64, available: f64 },
    #[error("sub-problem {0} has no servers")]
    NoServers(usize),
    #[error("sub-problem {0} has no shards")]
    NoShards(usize),
    #[error("load balancing needs a disjoint server partition, got {0}")]
    Strategy(String),
    #[error("solver returned {0}")]
    Solver(String),
    #[error(transparent)]
    Pop(#[from] PopError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shard {
    pub id: u64,
    pub load: f64,
    pub memory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Server {
    pub id: u64,
    pub capacity: f64,
}

/// Shards, servers and the current placement as `(shard, server)` index
/// pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbInstance {
    pub shards: Vec<Shard>,
    pub servers: Vec<Server>,
    pub placement: Vec<(usize, usize)>,
    /// Absolute load tolerance; 5% of the mean server load when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl LbInstance {
    pub fn validate(&self) -> Result<(), LbError> {
        if self.shards.is_empty() || self.servers.is_empty() {
            return Err(LbError::Invalid("need at least one shard and one server".into()));
        }
        for s in &self.shards {
            if !(s.load >= 0.0) || !s.load.is_finite() {
                return Err(LbError::Invalid(format!("shard {} has load {}", s.id, s.load)));
            }
            if !(s.memory > 0.0) || !s.memory.is_finite() {
                return Err(LbError::Invalid(format!("shard {} has memory {}", s.id, s.memory)));
            }
        }
        if let Some(v) = self
            .servers
            .iter()
            .find(|v| !(v.capacity > 0.0) || !v.capacity.is_finite())
        {
            return Err(LbError::Invalid(format!("server {} has capacity {}", v.id, v.capacity)));
        }
        for &(i, j) in &self.placement {
            if i >= self.shards.len() || j >= self.servers.len() {
                return Err(LbError::Invalid(format!("placement ({i}, {j}) out of range")));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(LbError::Invalid(format!("tolerance {eps} must be nonnegative")));
            }
        }
        Ok(())
    }

    /// Every shard must live somewhere. Sub-instances may break this: a shard
    /// whose server went to another sub-problem starts out unplaced.
    pub fn check_placement(&self) -> Result<(), LbError> {
        let mut placed = vec![false; self.shards.len()];
        for &(i, _) in &self.placement {
            placed[i] = true;
        }
        match placed.iter().position(|p| !p) {
            Some(i) => Err(LbError::Invalid(format!(
                "shard {} is not placed anywhere",
                self.shards[i].id
            ))),
            None => Ok(()),
        }
    }

    /// Errors when the shards cannot fit even with perfect packing.
    pub fn check_memory(&self) -> Result<(), LbError> {
        let needed: f64 = self.shards.iter().map(|s| s.memory).sum();
        let available: f64 = self.servers.iter().map(|s| s.capacity).sum();
        if needed > available {
            return Err(LbError::AggregateMemory { needed, available });
        }
        Ok(())
    }

    /// Mean load per server.
    pub fn mean_load(&self) -> f64 {
        self.shards.iter().map(|s| s.load).sum::<f64>() / self.servers.len() as f64
    }

    pub fn tolerance(&self) -> f64 {
        self.epsilon.unwrap_or(0.05 * self.mean_load())
    }

    /// `hosted[i][j]` is true when shard `i` currently lives on server `j`.
    pub fn hosted(&self) -> Vec<Vec<bool>> {
        let mut t = vec![vec![false; self.servers.len()]; self.shards.len()];
        for &(i, j) in &self.placement {
            t[i][j] = true;
        }
        t
    }

    /// Partitioning features: load, then memory.
    pub fn features(&self) -> Vec<EntityFeatures> {
        self.shards
            .iter()
            .map(|s| EntityFeatures::new(s.id, vec![s.load, s.memory]))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, LbError> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        inst.check_placement()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String, LbError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub shards: usize,
    pub servers: usize,
    /// Loads are drawn from a Zipf law over `1..=load_levels`.
    pub load_levels: u64,
    pub zipf_exponent: f64,
    /// Memories are log-uniform in this range.
    pub memory_range: (f64, f64),
    /// Spare memory over total shard memory.
    pub headroom: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            shards: 32,
            servers: 4,
            load_levels: 100,
            zipf_exponent: 1.1,
            memory_range: (1.0, 10.0),
            headroom: 0.3,
        }
    }
}

/// Seeded instance: Zipf loads, log-uniform memories, equal server memories
/// with the configured headroom, and every shard on one random server.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<LbInstance, LbError> {
    if config.shards == 0 || config.servers == 0 {
        return Err(LbError::Invalid("need at least one shard and one server".into()));
    }
    let zipf = Zipf::new(config.load_levels, config.zipf_exponent)
        .map_err(|e| LbError::Invalid(format!("zipf parameters: {e}")))?;
    let (lo, hi) = config.memory_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(LbError::Invalid(format!("memory range ({lo}, {hi})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shards: Vec<Shard> = (0..config.shards)
        .map(|i| Shard {
            id: i as u64,
            load: zipf.sample(&mut rng),
            memory: rng.gen_range(lo.ln()..hi.ln()).exp(),
        })
        .collect();
    let total: f64 = shards.iter().map(|s| s.memory).sum();
    let capacity = total * (1.0 + config.headroom) / config.servers as f64;
    let servers = (0..config.servers).map(|j| Server { id: j as u64, capacity }).collect();
    let placement = (0..config.shards)
        .map(|i| (i, rng.gen_range(0..config.servers)))
        .collect();
    Ok(LbInstance {
        shards,
        servers,
        placement,
        epsilon: None,
    })
}

/// Four servers, one shard carrying about half of all load and 21 light
/// shards. Split over two disjoint halves, whichever half gets the hot shard
/// cannot reach the global load window, unless the hot shard is replicated.
pub fn hot_shard_instance() -> LbInstance {
    let mut shards = vec![Shard {
        id: 0,
        load: 20.0,
        memory: 1.0,
    }];
    shards.extend((1..22).map(|i| Shard {
        id: i,
        load: 1.0,
        memory: 1.0,
    }));
    let servers = (0..4).map(|j| Server { id: j, capacity: 22.0 }).collect();
    let placement = (0..22).map(|i| (i, i % 4)).collect();
    LbInstance {
        shards,
        servers,
        placement,
        epsilon: None,
    }
}
