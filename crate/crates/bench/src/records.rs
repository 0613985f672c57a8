use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{BenchError, Domain, Status};

/// First line of every records file. Bump the version when columns change.
pub const RECORDS_SCHEMA: &str = "# pop-records v1";
pub const TIMINGS_SCHEMA: &str = "# pop-timings v1";

/// One method run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRecord {
    pub domain: Domain,
    pub seed: u64,
    /// `full`, `pop-<k>`, or the baseline's name.
    pub method: String,
    /// Sub-problem count; 1 for unpartitioned methods.
    pub k: usize,
    /// Empty for unpartitioned methods.
    pub partitioner: String,
    pub status: Status,
    pub objective: Option<f64>,
    pub feasible: bool,
    /// Decision variables over all sub-problems.
    pub variables: usize,
    pub max_sub_variables: Option<usize>,
    pub similarity_max_distance: Option<f64>,
    pub partition_ms: f64,
    pub max_sub_ms: f64,
    pub coalesce_ms: f64,
    /// Partition, critical path and coalesce.
    pub total_ms: f64,
    /// Partition, every sub-problem back to back, and coalesce.
    pub serial_ms: f64,
    pub message: Option<String>,
}

impl TradeoffRecord {
    /// Whether the record may enter quality comparisons.
    pub fn comparable(&self) -> bool {
        self.feasible && self.objective.is_some()
    }

    /// Whether the run counts as a success for the exit code.
    pub fn succeeded(&self) -> bool {
        self.feasible && matches!(self.status, Status::Optimal | Status::Heuristic)
    }
}

/// The columns of a record that do not depend on the clock.
#[derive(Serialize)]
struct QualityRow<'a> {
    domain: Domain,
    seed: u64,
    method: &'a str,
    k: usize,
    partitioner: &'a str,
    status: Status,
    objective: Option<f64>,
    feasible: bool,
    variables: usize,
    max_sub_variables: Option<usize>,
    similarity_max_distance: Option<f64>,
    /// Only written to the quarantine file.
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    domain: Domain,
    seed: u64,
    method: &'a str,
    k: usize,
    partitioner: &'a str,
    partition_ms: f64,
    max_sub_ms: f64,
    coalesce_ms: f64,
    total_ms: f64,
    serial_ms: f64,
}

fn quality<'a>(r: &'a TradeoffRecord, message: Option<&'a str>) -> QualityRow<'a> {
    QualityRow {
        domain: r.domain,
        seed: r.seed,
        method: &r.method,
        k: r.k,
        partitioner: &r.partitioner,
        status: r.status,
        objective: r.objective,
        feasible: r.feasible,
        variables: r.variables,
        max_sub_variables: r.max_sub_variables,
        similarity_max_distance: r.similarity_max_distance,
        message,
    }
}

fn with_schema(
    schema: &str,
    fill: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
) -> Result<Vec<u8>, BenchError> {
    let mut out = Vec::new();
    writeln!(out, "{schema}").expect("writing to memory");
    {
        let mut w = csv::Writer::from_writer(&mut out);
        fill(&mut w)?;
        w.flush().map_err(csv::Error::from)?;
    }
    Ok(out)
}

/// Feasible records, clock-free columns only, so the bytes depend on the
/// configuration alone.
pub fn records_csv(records: &[TradeoffRecord]) -> Result<Vec<u8>, BenchError> {
    with_schema(RECORDS_SCHEMA, |w| {
        records
            .iter()
            .filter(|r| r.comparable())
            .try_for_each(|r| w.serialize(quality(r, None)))
    })
}

/// Records kept out of quality comparisons, with the reason.
pub fn quarantine_csv(records: &[TradeoffRecord]) -> Result<Vec<u8>, BenchError> {
    with_schema(RECORDS_SCHEMA, |w| {
        records
            .iter()
            .filter(|r| !r.comparable())
            .try_for_each(|r| w.serialize(quality(r, Some(r.message.as_deref().unwrap_or("")))))
    })
}

/// Wall-clock columns for every record. These differ between runs.
pub fn timings_csv(records: &[TradeoffRecord]) -> Result<Vec<u8>, BenchError> {
    with_schema(TIMINGS_SCHEMA, |w| {
        records.iter().try_for_each(|r| {
            w.serialize(TimingRow {
                domain: r.domain,
                seed: r.seed,
                method: &r.method,
                k: r.k,
                partitioner: &r.partitioner,
                partition_ms: r.partition_ms,
                max_sub_ms: r.max_sub_ms,
                coalesce_ms: r.coalesce_ms,
                total_ms: r.total_ms,
                serial_ms: r.serial_ms,
            })
        })
    })
}

#[cfg(test)]
pub(crate) fn sample(seed: u64, method: &str, k: usize, objective: f64, total_ms: f64) -> TradeoffRecord {
    TradeoffRecord {
        domain: Domain::Traffic,
        seed,
        method: method.into(),
        k,
        partitioner: if method.starts_with("pop") {
            "random".into()
        } else {
            String::new()
        },
        status: Status::Optimal,
        objective: Some(objective),
        feasible: true,
        variables: 100,
        max_sub_variables: None,
        similarity_max_distance: None,
        partition_ms: 0.0,
        max_sub_ms: total_ms,
        coalesce_ms: 0.0,
        total_ms,
        serial_ms: total_ms,
        message: None,
    }
}
