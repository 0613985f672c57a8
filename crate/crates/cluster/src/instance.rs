use pop_core::{EntityFeatures, PopError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("job {0} has zero throughput under its equal share")]
    ZeroNormalizer(u64),
    #[error("sub-problem {0} has no jobs")]
    EmptySubInstance(usize),
    #[error("solver returned {0}")]
    Solver(String),
    #[error(transparent)]
    Pop(#[from] PopError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: u64,
    /// Priority weight.
    #[serde(rename = "w")]
    pub priority: f64,
    /// Number of workers the job runs on.
    #[serde(rename = "z")]
    pub gpu_request: u32,
    /// Throughput on one worker of each resource type.
    #[serde(rename = "T")]
    pub throughputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub types: Vec<String>,
    /// Worker count per type; fractional inside capacity-split sub-problems.
    pub num_workers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInstance {
    pub jobs: Vec<Job>,
    pub cluster: ClusterSpec,
}

impl ClusterInstance {
    pub fn num_types(&self) -> usize {
        self.cluster.num_workers.len()
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        let m = self.num_types();
        if self.cluster.types.len() != m {
            return Err(ClusterError::Invalid("types and num_workers differ in length".into()));
        }
        if let Some(w) = self.cluster.num_workers.iter().find(|&&w| !(w > 0.0) || !w.is_finite()) {
            return Err(ClusterError::Invalid(format!("worker count {w} must be positive")));
        }
        for job in &self.jobs {
            let bad = |why: &str| Err(ClusterError::Invalid(format!("job {}: {why}", job.id)));
            if !(job.priority > 0.0) || !job.priority.is_finite() {
                return bad("priority must be positive");
            }
            if job.gpu_request == 0 {
                return bad("gpu request must be at least 1");
            }
            if job.throughputs.len() != m {
                return bad("throughput vector has the wrong length");
            }
            if job.throughputs.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
                return bad("throughputs must be finite and nonnegative");
            }
            if job.throughputs.iter().all(|&t| t == 0.0) {
                return bad("needs a positive throughput on some type");
            }
        }
        Ok(())
    }

    /// Normalising allocation: `min(1, workers_j / (n * z_m))` per type,
    /// scaled down so each job's row sums to at most 1.
    pub fn equal_share(&self) -> Vec<Vec<f64>> {
        let n = self.jobs.len() as f64;
        self.jobs
            .iter()
            .map(|job| {
                let mut row: Vec<f64> = self
                    .cluster
                    .num_workers
                    .iter()
                    .map(|&w| (w / (n * job.gpu_request as f64)).min(1.0))
                    .collect();
                let total: f64 = row.iter().sum();
                if total > 1.0 {
                    row.iter_mut().for_each(|x| *x /= total);
                }
                row
            })
            .collect()
    }

    /// `throughput(m, X_equal)` for every job.
    pub fn equal_share_throughputs(&self) -> Result<Vec<f64>, ClusterError> {
        self.jobs
            .iter()
            .zip(self.equal_share())
            .map(|(job, row)| {
                let t: f64 = job.throughputs.iter().zip(&row).map(|(a, b)| a * b).sum();
                if t > 0.0 {
                    Ok(t)
                } else {
                    Err(ClusterError::ZeroNormalizer(job.id))
                }
            })
            .collect()
    }

    /// Partitioning features: priority, request, then one throughput per type.
    pub fn features(&self) -> Vec<EntityFeatures> {
        self.jobs
            .iter()
            .map(|j| {
                let mut f = vec![j.priority, j.gpu_request as f64];
                f.extend(&j.throughputs);
                EntityFeatures::new(j.id, f)
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, ClusterError> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String, ClusterError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub jobs: usize,
    pub types: Vec<String>,
    pub num_workers: Vec<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            jobs: 96,
            types: vec!["v100".into(), "p100".into(), "k80".into()],
            num_workers: vec![32.0, 32.0, 32.0],
        }
    }
}

/// Seeded instance: log-uniform throughputs in [0.2, 5], priorities from
/// {1, 2, 4}, requests from {1, 2, 4, 8}.
pub fn generate(config: &GeneratorConfig, seed: u64) -> ClusterInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (0.2f64.ln(), 5.0f64.ln());
    let jobs = (0..config.jobs)
        .map(|id| Job {
            id: id as u64,
            priority: *[1.0, 2.0, 4.0].choose(&mut rng).expect("non-empty"),
            gpu_request: *[1, 2, 4, 8].choose(&mut rng).expect("non-empty"),
            throughputs: config.num_workers.iter().map(|_| rng.gen_range(lo..hi).exp()).collect(),
        })
        .collect();
    ClusterInstance {
        jobs,
        cluster: ClusterSpec {
            types: config.types.clone(),
            num_workers: config.num_workers.clone(),
        },
    }
}
