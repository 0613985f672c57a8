use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{BenchError, Domain, Partitioner};

/// Overrides the per-solve time limit, in seconds.
pub const TIME_LIMIT_ENV: &str = "POP_SOLVE_TIME_LIMIT";

fn default_k_list() -> Vec<usize> {
    vec![1, 2, 4, 8, 16]
}

fn default_parallelism() -> usize {
    1
}

fn default_time_limit() -> f64 {
    300.0
}

fn default_true() -> bool {
    true
}

/// One experiment, read from JSON. Instances are generated from
/// `generator` once per seed unless `instance_file` is given, in which case
/// the seeds only drive partitioning and the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be left out when the command line names the domain.
    #[serde(default)]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Domain generator settings; missing fields take their defaults.
    #[serde(default)]
    pub generator: Value,
    #[serde(default)]
    pub instance_file: Option<PathBuf>,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default)]
    pub partitioner: Partitioner,
    /// Entities whose load exceeds this multiple of the mean are replicated.
    #[serde(default)]
    pub replication_threshold: Option<f64>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    pub output_dir: PathBuf,
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: f64,
    #[serde(default = "default_true")]
    pub baseline: bool,
}

impl ExperimentConfig {
    pub fn new(domain: Domain, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            domain: Some(domain),
            seeds: vec![0],
            generator: Value::Null,
            instance_file: None,
            k_list: default_k_list(),
            partitioner: Partitioner::Random,
            replication_threshold: None,
            parallelism: 1,
            output_dir: output_dir.into(),
            time_limit_secs: default_time_limit(),
            baseline: true,
        }
    }

    /// Reads a config file. A relative `instance_file` or `output_dir` is
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.display().to_string(), e))?;
        let mut config: Self = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(f) = &config.instance_file {
            if f.is_relative() {
                config.instance_file = Some(base.join(f));
            }
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn domain(&self) -> Result<Domain, BenchError> {
        self.domain.ok_or_else(|| BenchError::Config("no domain given".into()))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.domain()?;
        if self.seeds.is_empty() {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        if let Some(k) = self.k_list.iter().find(|&&k| k == 0) {
            return Err(BenchError::Config(format!("k = {k} is not a sub-problem count")));
        }
        if self.parallelism == 0 {
            return Err(BenchError::Config("parallelism must be at least 1".into()));
        }
        if let Some(t) = self.replication_threshold {
            if !(t > 0.0) || !t.is_finite() {
                return Err(BenchError::Config(format!(
                    "replication threshold {t} must be positive"
                )));
            }
        }
        if !(self.time_limit_secs > 0.0) {
            return Err(BenchError::Config(format!(
                "time limit {} must be positive",
                self.time_limit_secs
            )));
        }
        if self.instance_file.is_some() && !self.generator.is_null() {
            return Err(BenchError::Config(
                "give either an instance file or generator settings".into(),
            ));
        }
        Ok(())
    }

    /// The configured limit, unless the environment overrides it.
    pub fn time_limit(&self) -> Result<Duration, BenchError> {
        let secs = match std::env::var(TIME_LIMIT_ENV) {
            Ok(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|s| *s > 0.0 && s.is_finite())
                .ok_or_else(|| BenchError::Config(format!("{TIME_LIMIT_ENV}={v:?} is not a positive number")))?,
            Err(_) => self.time_limit_secs,
        };
        Ok(Duration::from_secs_f64(secs))
    }
}
