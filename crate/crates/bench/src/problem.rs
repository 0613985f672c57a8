use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use pop_cluster::{ClusterInstance, ClusterPop};
use pop_core::{
    partition_random, partition_skewed, partition_stratified, replicate_hot, similarity_report, solve_pop,
    AllocationMatrix, EntityFeatures, FeasibilityReport, PartitionPlan, PopError, SplitStrategy,
};
use pop_loadbalance::{LbInstance, LbPop, ShardMap};
use pop_lp::{Sense, SimplexSolver, SolveLimits};
use pop_traffic::{DemandConfig, TrafficInstance, TrafficPop};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Cluster,
    Traffic,
    #[serde(rename = "loadbalance")]
    LoadBalance,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Cluster, Domain::Traffic, Domain::LoadBalance];

    /// Label of the domain's heuristic baseline.
    pub fn baseline_label(self) -> &'static str {
        match self {
            Domain::Cluster | Domain::LoadBalance => "greedy",
            Domain::Traffic => "cspf",
        }
    }

    pub fn sense(self) -> Sense {
        match self {
            Domain::Cluster | Domain::Traffic => Sense::Maximize,
            Domain::LoadBalance => Sense::Minimize,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Cluster => "cluster",
            Domain::Traffic => "traffic",
            Domain::LoadBalance => "loadbalance",
        })
    }
}

impl FromStr for Domain {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "cluster" => Ok(Domain::Cluster),
            "traffic" => Ok(Domain::Traffic),
            "loadbalance" | "load-balance" | "lb" => Ok(Domain::LoadBalance),
            other => Err(BenchError::Config(format!("unknown domain {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partitioner {
    #[default]
    Random,
    Stratified,
    Skewed,
}

impl fmt::Display for Partitioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partitioner::Random => "random",
            Partitioner::Stratified => "stratified",
            Partitioner::Skewed => "skewed",
        })
    }
}

impl FromStr for Partitioner {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "random" => Ok(Partitioner::Random),
            "stratified" => Ok(Partitioner::Stratified),
            "skewed" => Ok(Partitioner::Skewed),
            other => Err(BenchError::Config(format!("unknown partitioner {other:?}"))),
        }
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    /// A heuristic ran to completion; there is no optimality claim.
    Heuristic,
    /// Some sub-problem (or the whole problem) has no feasible point.
    Infeasible,
    /// A time or iteration limit cut the solve short.
    Censored,
    Failed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Heuristic => "heuristic",
            Status::Infeasible => "infeasible",
            Status::Censored => "censored",
            Status::Failed => "failed",
        })
    }
}

fn classify(message: &str, infeasible: bool) -> Status {
    if message.contains("IterationLimit") || message.contains("GapLimit") {
        Status::Censored
    } else if infeasible {
        Status::Infeasible
    } else {
        Status::Failed
    }
}

/// Wall-clock components of one method's run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timing {
    pub partition: Duration,
    /// Critical path of the map step; the whole solve for unpartitioned methods.
    pub max_sub: Duration,
    pub coalesce: Duration,
    /// Sum of all sub-problem times, as if they ran one after another.
    pub serial_sub: Duration,
}

impl Timing {
    fn single(solve: Duration) -> Self {
        Self {
            max_sub: solve,
            serial_sub: solve,
            ..Default::default()
        }
    }

    /// Partition plus the map step's critical path plus coalescing.
    pub fn total(&self) -> Duration {
        self.partition + self.max_sub + self.coalesce
    }

    pub fn serial(&self) -> Duration {
        self.partition + self.serial_sub + self.coalesce
    }
}

/// Result of running one method on one instance.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub allocation: Option<AllocationMatrix>,
    /// Objective of `allocation` scored on the original instance.
    pub objective: Option<f64>,
    pub feasibility: Option<FeasibilityReport>,
    pub variables: usize,
    pub max_sub_variables: Option<usize>,
    pub similarity: Option<f64>,
    pub timing: Timing,
    pub message: Option<String>,
}

impl Outcome {
    pub fn feasible(&self) -> bool {
        self.feasibility.as_ref().is_some_and(FeasibilityReport::is_feasible)
    }

    fn failed(status: Status, message: String, timing: Timing) -> Self {
        Self {
            status,
            allocation: None,
            objective: None,
            feasibility: None,
            variables: 0,
            max_sub_variables: None,
            similarity: None,
            timing,
            message: Some(message),
        }
    }
}

/// Traffic generator settings: a topology plus demands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficParams {
    pub topology: pop_traffic::GeneratorConfig,
    pub demand: DemandConfig,
}

/// One instance of any domain.
#[derive(Debug, Clone)]
pub enum Problem {
    Cluster(ClusterInstance),
    Traffic(TrafficInstance),
    LoadBalance(LbInstance),
}

fn params<T: serde::de::DeserializeOwned + Default>(value: &Value) -> Result<T, BenchError> {
    if value.is_null() {
        return Ok(T::default());
    }
    Ok(serde_json::from_value(value.clone())?)
}

impl Problem {
    /// Seeded instance from the domain's generator. `generator` holds the
    /// domain's generator settings; null means defaults.
    pub fn generate(domain: Domain, generator: &Value, seed: u64) -> Result<Self, BenchError> {
        Ok(match domain {
            Domain::Cluster => Problem::Cluster(pop_cluster::generate(
                &params::<pop_cluster::GeneratorConfig>(generator)?,
                seed,
            )),
            Domain::Traffic => {
                let p: TrafficParams = params(generator)?;
                Problem::Traffic(TrafficInstance::generate(&p.topology, &p.demand, seed)?)
            }
            Domain::LoadBalance => Problem::LoadBalance(pop_loadbalance::generate(
                &params::<pop_loadbalance::GeneratorConfig>(generator)?,
                seed,
            )?),
        })
    }

    /// Instance whose size grows with one number: jobs for the cluster,
    /// nodes for traffic (1.5 links and 50 commodities per node, capped by the
    /// number of node pairs), shards for load balancing.
    pub fn sized(domain: Domain, size: usize, seed: u64) -> Result<Self, BenchError> {
        let generator = match domain {
            Domain::Cluster => serde_json::to_value(pop_cluster::GeneratorConfig {
                jobs: size,
                ..Default::default()
            })?,
            Domain::Traffic => serde_json::to_value(TrafficParams {
                topology: pop_traffic::GeneratorConfig {
                    nodes: size,
                    links: (size * 3).div_ceil(2),
                    ..Default::default()
                },
                demand: DemandConfig {
                    commodities: (50 * size).min(size * size.saturating_sub(1)),
                    ..Default::default()
                },
            })?,
            Domain::LoadBalance => serde_json::to_value(pop_loadbalance::GeneratorConfig {
                shards: size,
                ..Default::default()
            })?,
        };
        Self::generate(domain, &generator, seed)
    }

    pub fn from_json(domain: Domain, text: &str) -> Result<Self, BenchError> {
        Ok(match domain {
            Domain::Cluster => Problem::Cluster(ClusterInstance::from_json(text)?),
            Domain::Traffic => Problem::Traffic(TrafficInstance::from_json(text)?),
            Domain::LoadBalance => Problem::LoadBalance(LbInstance::from_json(text)?),
        })
    }

    pub fn load(domain: Domain, path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.display().to_string(), e))?;
        Self::from_json(domain, &text)
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(match self {
            Problem::Cluster(i) => i.to_json()?,
            Problem::Traffic(i) => i.to_json()?,
            Problem::LoadBalance(i) => i.to_json()?,
        })
    }

    pub fn domain(&self) -> Domain {
        match self {
            Problem::Cluster(_) => Domain::Cluster,
            Problem::Traffic(_) => Domain::Traffic,
            Problem::LoadBalance(_) => Domain::LoadBalance,
        }
    }

    pub fn features(&self) -> Vec<EntityFeatures> {
        match self {
            Problem::Cluster(i) => i.features(),
            Problem::Traffic(i) => i.features(),
            Problem::LoadBalance(i) => i.features(),
        }
    }

    /// Entity ids in row order.
    pub fn entity_ids(&self) -> Vec<u64> {
        match self {
            Problem::Cluster(i) => i.jobs.iter().map(|j| j.id).collect(),
            Problem::Traffic(i) => i.commodities.iter().map(|c| c.id).collect(),
            Problem::LoadBalance(i) => i.shards.iter().map(|s| s.id).collect(),
        }
    }

    fn capacities(&self) -> Vec<f64> {
        match self {
            Problem::Cluster(i) => i.cluster.num_workers.clone(),
            Problem::Traffic(i) => i.topology.capacities(),
            Problem::LoadBalance(i) => vec![1.0; i.servers.len()],
        }
    }

    fn strategy(&self) -> SplitStrategy {
        match self {
            Problem::Cluster(_) | Problem::Traffic(_) => SplitStrategy::CapacitySplit,
            Problem::LoadBalance(_) => SplitStrategy::DisjointPartition,
        }
    }

    /// Feature used for replication and skewed grouping: GPU request,
    /// demand, shard load.
    fn load_feature(&self) -> usize {
        match self {
            Problem::Cluster(_) => 1,
            Problem::Traffic(_) => 2,
            Problem::LoadBalance(_) => 0,
        }
    }

    /// Skewed splits group traffic by source node, as a split by region
    /// would, jobs by their speed on the first worker type, and shards by
    /// load.
    fn skew_key(&self) -> usize {
        match self {
            Problem::Cluster(_) => 2,
            Problem::Traffic(_) => 0,
            Problem::LoadBalance(_) => 0,
        }
    }

    /// Solver settings for this domain. Load balancing closes the gap
    /// completely, so partitioned costs can be compared with the optimum.
    pub fn solver(&self, time_limit: Option<Duration>) -> SimplexSolver {
        let mut limits = SolveLimits {
            time_limit,
            ..Default::default()
        };
        if matches!(self, Problem::LoadBalance(_)) {
            limits.gap = 0.0;
        }
        SimplexSolver::new(limits)
    }

    pub fn plan(
        &self,
        k: usize,
        partitioner: Partitioner,
        seed: u64,
        replication_threshold: Option<f64>,
    ) -> Result<PartitionPlan, PopError> {
        let (features, caps, strategy) = (self.features(), self.capacities(), self.strategy());
        let plan = match partitioner {
            Partitioner::Random => partition_random(&features, &caps, k, seed, strategy)?,
            Partitioner::Stratified => {
                partition_stratified(&features, &caps, k, &[self.load_feature()], 4, seed, strategy)?
            }
            Partitioner::Skewed => partition_skewed(&features, &caps, k, self.skew_key(), seed, strategy)?,
        };
        match replication_threshold {
            Some(t) => replicate_hot(&plan, &features, self.load_feature(), t),
            None => Ok(plan),
        }
    }

    /// Objective and feasibility of `x` against the original instance.
    pub fn evaluate(&self, x: &AllocationMatrix) -> Result<(f64, FeasibilityReport), BenchError> {
        Ok(match self {
            Problem::Cluster(i) => (pop_cluster::objective(i, x)?, pop_cluster::verify_feasible(i, x)),
            Problem::Traffic(i) => (
                pop_traffic::total_flow(x),
                pop_traffic::verify_feasible(&i.topology, &i.commodities, x),
            ),
            Problem::LoadBalance(i) => {
                let map = ShardMap::from_fractions(x.clone());
                (
                    pop_loadbalance::movement_cost(i, &map),
                    pop_loadbalance::verify_feasible(i, &map),
                )
            }
        })
    }

    fn scored(&self, status: Status, x: AllocationMatrix, variables: usize, timing: Timing) -> Outcome {
        match self.evaluate(&x) {
            Ok((objective, report)) => Outcome {
                status,
                objective: Some(objective),
                feasibility: Some(report),
                allocation: Some(x),
                variables,
                max_sub_variables: None,
                similarity: None,
                timing,
                message: None,
            },
            Err(e) => Outcome::failed(Status::Failed, e.to_string(), timing),
        }
    }

    pub fn solve_full(&self, time_limit: Option<Duration>) -> Outcome {
        let solver = self.solver(time_limit);
        let start = Instant::now();
        let solved = match self {
            Problem::Cluster(i) => pop_cluster::solve_full(i, &solver)
                .map(|s| (s.allocation, s.variables))
                .map_err(|e| (e.to_string(), matches!(e, pop_cluster::ClusterError::Solver(_)))),
            Problem::Traffic(i) => pop_traffic::solve_full(&i.topology, &i.commodities, i.path_slots(), &solver)
                .map(|s| (s.flows, s.variables))
                .map_err(|e| (e.to_string(), matches!(e, pop_traffic::TrafficError::Solver(_)))),
            Problem::LoadBalance(i) => pop_loadbalance::solve_full(i, &solver)
                .map(|s| (s.map.fractions, s.variables))
                .map_err(|e| {
                    let infeasible = matches!(
                        e,
                        pop_loadbalance::LbError::Solver(_) | pop_loadbalance::LbError::AggregateMemory { .. }
                    );
                    (e.to_string(), infeasible)
                }),
        };
        let timing = Timing::single(start.elapsed());
        match solved {
            Ok((x, variables)) => self.scored(Status::Optimal, x, variables, timing),
            Err((message, infeasible)) => Outcome::failed(classify(&message, infeasible), message, timing),
        }
    }

    /// Partitions, solves every sub-problem with up to `parallelism` at
    /// once, and scores the coalesced allocation.
    pub fn solve_pop(
        &self,
        k: usize,
        partitioner: Partitioner,
        seed: u64,
        replication_threshold: Option<f64>,
        parallelism: usize,
        time_limit: Option<Duration>,
    ) -> Outcome {
        let start = Instant::now();
        let plan = self.plan(k, partitioner, seed, replication_threshold);
        let partition = start.elapsed();
        let mut timing = Timing {
            partition,
            ..Default::default()
        };
        let plan = match plan {
            Ok(p) => p,
            Err(e) => return Outcome::failed(Status::Failed, e.to_string(), timing),
        };
        for w in &plan.warnings {
            log::warn!("{} k={k}: {w}", self.domain());
        }
        let similarity = similarity_report(&plan, &self.features())
            .ok()
            .map(|r| r.max_distance());
        let solver = self.solver(time_limit);
        let solved = match self {
            Problem::Cluster(i) => solve_pop(
                &ClusterPop {
                    instance: i,
                    solver: &solver,
                },
                &plan,
                parallelism,
            ),
            Problem::Traffic(i) => solve_pop(
                &TrafficPop {
                    instance: i,
                    solver: &solver,
                },
                &plan,
                parallelism,
            ),
            Problem::LoadBalance(i) => solve_pop(
                &LbPop {
                    instance: i,
                    solver: &solver,
                },
                &plan,
                parallelism,
            ),
        };
        match solved {
            Ok((x, stats)) => {
                timing.max_sub = stats.max_sub;
                timing.serial_sub = stats.total_sub;
                timing.coalesce = stats.coalesce;
                let variables = stats.subproblems.iter().map(|s| s.variables).sum();
                let mut out = self.scored(Status::Optimal, x, variables, timing);
                out.max_sub_variables = Some(stats.max_variables());
                out.similarity = similarity;
                out
            }
            Err(e) => {
                timing.max_sub = start.elapsed() - partition;
                timing.serial_sub = timing.max_sub;
                let infeasible = matches!(e, PopError::SubproblemInfeasible { .. });
                let message = e.to_string();
                let mut out = Outcome::failed(classify(&message, infeasible), message, timing);
                out.similarity = similarity;
                out
            }
        }
    }

    /// The domain's heuristic: greedy max-min for the cluster, CSPF for
    /// traffic, greedy hot-server relief for load balancing.
    pub fn baseline(&self, seed: u64) -> Outcome {
        let start = Instant::now();
        let x = match self {
            Problem::Cluster(i) => pop_cluster::greedy_baseline(i),
            Problem::Traffic(i) => pop_traffic::cspf_baseline(&i.topology, &i.commodities, i.path_slots(), seed),
            Problem::LoadBalance(i) => pop_loadbalance::greedy_baseline(i).map.fractions,
        };
        self.scored(Status::Heuristic, x, 0, Timing::single(start.elapsed()))
    }
}
