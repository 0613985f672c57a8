use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::plot::emit_plot_data;
use crate::records::{quarantine_csv, records_csv, timings_csv};
use crate::{BenchError, ExperimentConfig, Outcome, Partitioner, Problem, TradeoffRecord};

/// What a run produced. Artifacts are already on disk under `output_dir`.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<TradeoffRecord>,
    pub output_dir: PathBuf,
}

impl RunReport {
    /// True when every solve reached optimality (or the heuristic finished)
    /// and every allocation passed the feasibility check.
    pub fn all_succeeded(&self) -> bool {
        self.records.iter().all(TradeoffRecord::succeeded)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TradeoffRecord> {
        self.records.iter().filter(|r| !r.succeeded())
    }
}

#[derive(Serialize)]
struct AllocationDump<'a> {
    domain: String,
    seed: u64,
    method: &'a str,
    partitioner: &'a str,
    entities: Vec<u64>,
    allocation: &'a pop_core::AllocationMatrix,
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn record(
    problem: &Problem,
    seed: u64,
    method: String,
    k: usize,
    partitioner: Option<Partitioner>,
    out: &Outcome,
) -> TradeoffRecord {
    let message = out.message.clone().or_else(|| {
        let report = out.feasibility.as_ref().filter(|_| !out.feasible())?;
        let first = report.violations.first()?;
        Some(format!(
            "{} violations, first: {}",
            report.violations.len(),
            first.constraint
        ))
    });
    TradeoffRecord {
        domain: problem.domain(),
        seed,
        method,
        k,
        partitioner: partitioner.map(|p| p.to_string()).unwrap_or_default(),
        status: out.status,
        objective: out.objective,
        feasible: out.feasible(),
        variables: out.variables,
        max_sub_variables: out.max_sub_variables,
        similarity_max_distance: out.similarity,
        partition_ms: ms(out.timing.partition),
        max_sub_ms: ms(out.timing.max_sub),
        coalesce_ms: ms(out.timing.coalesce),
        total_ms: ms(out.timing.total()),
        serial_ms: ms(out.timing.serial()),
        message,
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    std::fs::write(path, bytes).map_err(|e| BenchError::Io(path.display().to_string(), e))
}

fn dump(dir: &Path, problem: &Problem, rec: &TradeoffRecord, out: &Outcome) -> Result<(), BenchError> {
    let Some(allocation) = &out.allocation else {
        return Ok(());
    };
    let mut name = format!("{}-seed{}-{}", rec.domain, rec.seed, rec.method);
    if !rec.partitioner.is_empty() {
        name = format!("{name}-{}", rec.partitioner);
    }
    let body = AllocationDump {
        domain: rec.domain.to_string(),
        seed: rec.seed,
        method: &rec.method,
        partitioner: &rec.partitioner,
        entities: problem.entity_ids(),
        allocation,
    };
    write(
        &dir.join(format!("{name}.json")),
        serde_json::to_string(&body)?.as_bytes(),
    )
}

/// Runs the full solve, POP-k for every configured k and the baseline on
/// every seed, then writes:
///
/// - `records.csv`: feasible records, clock-free columns (byte-stable);
/// - `infeasible.csv`: everything kept out of comparisons, with reasons;
/// - `timings.csv`: wall-clock columns;
/// - `records.json`: every record with all fields;
/// - `plot.csv`: per-method mean and deviation of runtime and quality;
/// - `allocations/`: one JSON allocation per method and seed.
///
/// Infeasible sub-problems and time limits mark the record and the run
/// continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, BenchError> {
    config.validate()?;
    let domain = config.domain()?;
    let limit = Some(config.time_limit()?);
    let dir = &config.output_dir;
    let alloc_dir = dir.join("allocations");
    std::fs::create_dir_all(&alloc_dir).map_err(|e| BenchError::Io(alloc_dir.display().to_string(), e))?;
    let from_file = match &config.instance_file {
        Some(path) => Some(Problem::load(domain, path)?),
        None => None,
    };

    let mut records = Vec::new();
    for &seed in &config.seeds {
        let problem = match &from_file {
            Some(p) => p.clone(),
            None => Problem::generate(domain, &config.generator, seed)?,
        };
        let mut runs: Vec<(String, usize, Option<Partitioner>, Outcome)> = Vec::new();
        runs.push(("full".into(), 1, None, problem.solve_full(limit)));
        for &k in &config.k_list {
            let out = problem.solve_pop(
                k,
                config.partitioner,
                seed,
                config.replication_threshold,
                config.parallelism,
                limit,
            );
            runs.push((format!("pop-{k}"), k, Some(config.partitioner), out));
        }
        if config.baseline {
            runs.push((domain.baseline_label().into(), 1, None, problem.baseline(seed)));
        }
        for (method, k, partitioner, out) in runs {
            let rec = record(&problem, seed, method, k, partitioner, &out);
            log::info!(
                "{domain} seed {seed} {}: {} objective {:?} feasible {} in {:.1} ms",
                rec.method,
                rec.status,
                rec.objective,
                rec.feasible,
                rec.total_ms
            );
            dump(&alloc_dir, &problem, &rec, &out)?;
            records.push(rec);
        }
    }

    write(&dir.join("records.csv"), &records_csv(&records)?)?;
    write(&dir.join("infeasible.csv"), &quarantine_csv(&records)?)?;
    write(&dir.join("timings.csv"), &timings_csv(&records)?)?;
    write(&dir.join("plot.csv"), &emit_plot_data(&records)?)?;
    write(
        &dir.join("records.json"),
        serde_json::to_string_pretty(&records)?.as_bytes(),
    )?;
    Ok(RunReport {
        records,
        output_dir: dir.clone(),
    })
}
