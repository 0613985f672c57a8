use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::{BenchError, Domain, TradeoffRecord};

pub const PLOT_SCHEMA: &str = "# pop-plot v1";

/// One method's points summarised across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub domain: Domain,
    pub method: String,
    pub k: usize,
    pub partitioner: String,
    pub points: usize,
    pub runtime_ms_mean: f64,
    pub runtime_ms_std: f64,
    pub objective_mean: f64,
    pub objective_std: f64,
    /// Objective over the same seed's full optimum; empty when no seed had one.
    pub relative_mean: Option<f64>,
    pub relative_std: Option<f64>,
}

/// Mean and sample standard deviation; the deviation of one value is 0.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Full solves first, then partitioned runs by k, then heuristics.
fn method_rank(r: &TradeoffRecord) -> u8 {
    if r.method == "full" {
        0
    } else if r.method.starts_with("pop-") {
        1
    } else {
        2
    }
}

/// Groups feasible records into per-method series, in a fixed order.
pub fn plot_series(records: &[TradeoffRecord]) -> Vec<Series> {
    let full: BTreeMap<(Domain, u64), f64> = records
        .iter()
        .filter(|r| r.method == "full" && r.comparable())
        .filter_map(|r| Some(((r.domain, r.seed), r.objective?)))
        .collect();
    let mut groups: BTreeMap<(Domain, u8, usize, &str, &str), Vec<&TradeoffRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.comparable()) {
        groups
            .entry((r.domain, method_rank(r), r.k, &r.partitioner, &r.method))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((domain, _, k, partitioner, method), rs)| {
            let runtimes: Vec<f64> = rs.iter().map(|r| r.total_ms).collect();
            let objectives: Vec<f64> = rs.iter().filter_map(|r| r.objective).collect();
            let relative: Vec<f64> = rs
                .iter()
                .filter_map(|r| {
                    let best = *full.get(&(r.domain, r.seed))?;
                    let value = r.objective?;
                    (best != 0.0).then(|| value / best)
                })
                .collect();
            let (runtime_ms_mean, runtime_ms_std) = mean_std(&runtimes);
            let (objective_mean, objective_std) = mean_std(&objectives);
            let (relative_mean, relative_std) = if relative.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&relative);
                (Some(m), Some(s))
            };
            Series {
                domain,
                method: method.to_string(),
                k,
                partitioner: partitioner.to_string(),
                points: rs.len(),
                runtime_ms_mean,
                runtime_ms_std,
                objective_mean,
                objective_std,
                relative_mean,
                relative_std,
            }
        })
        .collect()
}

/// Plot-ready CSV: one row per method with error bars across seeds.
pub fn emit_plot_data(records: &[TradeoffRecord]) -> Result<Vec<u8>, BenchError> {
    let mut out = Vec::new();
    writeln!(out, "{PLOT_SCHEMA}").expect("writing to memory");
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for s in plot_series(records) {
            w.serialize(s)?;
        }
        w.flush().map_err(csv::Error::from)?;
    }
    Ok(out)
}
