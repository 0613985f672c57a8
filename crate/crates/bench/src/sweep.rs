use std::io::Write;
use std::time::Duration;

use serde::Serialize;

use crate::{BenchError, Domain, Partitioner, Problem, Status};

/// Full and partitioned solve times at one instance size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub size: usize,
    /// Variables of the full program.
    pub variables: usize,
    pub full_status: Status,
    pub full_ms: f64,
    pub pop_status: Status,
    /// Partition, slowest sub-problem and coalesce.
    pub pop_ms: f64,
    pub pop_serial_ms: f64,
    pub pop_max_sub_variables: Option<usize>,
}

impl SweepPoint {
    fn both_solved(&self) -> bool {
        self.full_status == Status::Optimal && self.pop_status == Status::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub domain: Domain,
    pub k: usize,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of log full time against log variable count.
    pub slope: Option<f64>,
}

impl SweepReport {
    /// The largest size where both solves finished.
    pub fn largest_solved(&self) -> Option<&SweepPoint> {
        self.points.iter().rev().find(|p| p.both_solved())
    }

    /// Whether POP-k beat the full solve at the largest solved size.
    pub fn pop_faster_at_largest(&self) -> Option<bool> {
        self.largest_solved().map(|p| p.pop_ms < p.full_ms)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, BenchError> {
        let mut out = Vec::new();
        writeln!(out, "# pop-sweep v1").expect("writing to memory");
        {
            let mut w = csv::Writer::from_writer(&mut out);
            for p in &self.points {
                w.serialize(p)?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        Ok(out)
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`. Needs two
/// distinct positive `x` values.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Times the full solve and POP-k (random split) on growing instances.
/// Sizes must ascend. With `stop_after`, the sweep ends after the first
/// size whose full solve takes at least that long. A solve cut off by the
/// time limit is recorded as censored and left out of the slope.
pub fn scaling_sweep(
    domain: Domain,
    sizes: &[usize],
    k: usize,
    seed: u64,
    parallelism: usize,
    time_limit: Duration,
    stop_after: Option<Duration>,
) -> Result<SweepReport, BenchError> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Config(format!(
            "sizes {sizes:?} must be non-empty and ascending"
        )));
    }
    if k == 0 {
        return Err(BenchError::Config("k must be at least 1".into()));
    }
    let mut points = Vec::new();
    for &size in sizes {
        let problem = Problem::sized(domain, size, seed)?;
        let full = problem.solve_full(Some(time_limit));
        let pop = problem.solve_pop(k, Partitioner::Random, seed, None, parallelism, Some(time_limit));
        let point = SweepPoint {
            size,
            variables: full.variables,
            full_status: full.status,
            full_ms: full.timing.total().as_secs_f64() * 1e3,
            pop_status: pop.status,
            pop_ms: pop.timing.total().as_secs_f64() * 1e3,
            pop_serial_ms: pop.timing.serial().as_secs_f64() * 1e3,
            pop_max_sub_variables: pop.max_sub_variables,
        };
        log::info!(
            "{domain} size {size}: {} variables, full {:.0} ms ({}), pop-{k} {:.0} ms ({})",
            point.variables,
            point.full_ms,
            point.full_status,
            point.pop_ms,
            point.pop_status
        );
        let slow_enough = stop_after.is_some_and(|t| full.timing.total() >= t);
        points.push(point);
        if slow_enough {
            break;
        }
    }
    let timed: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.full_status == Status::Optimal)
        .map(|p| (p.variables as f64, p.full_ms))
        .collect();
    Ok(SweepReport {
        domain,
        k,
        seed,
        slope: log_log_slope(&timed),
        points,
    })
}
