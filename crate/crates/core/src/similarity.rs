//! How closely each sub-problem's entity distribution tracks the whole.
//!
//! Features are z-scored with the global mean and standard deviation, then
//! each sub-problem is summarised by its mean vector and population
//! covariance matrix. The distance of a sub-problem is
//! `|mean_sub - mean_all|_2 + |cov_sub - cov_all|_F`.

use serde::{Deserialize, Serialize};

use crate::{validate_features, EntityFeatures, PartitionPlan, PopError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubDistribution {
    pub members: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// False when fewer than two members made the covariance meaningless;
    /// it is then reported as the zero matrix.
    pub covariance_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub global: SubDistribution,
    pub subproblems: Vec<SubDistribution>,
    pub distances: Vec<f64>,
}

impl SimilarityReport {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

fn summarise(rows: &[&[f64]], dims: usize) -> SubDistribution {
    let n = rows.len();
    let mut mean = vec![0.0; dims];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    if n > 0 {
        mean.iter_mut().for_each(|m| *m /= n as f64);
    }
    let mut covariance = vec![vec![0.0; dims]; dims];
    let covariance_defined = n >= 2;
    if covariance_defined {
        for r in rows {
            for a in 0..dims {
                let da = r[a] - mean[a];
                for b in a..dims {
                    covariance[a][b] += da * (r[b] - mean[b]);
                }
            }
        }
        for a in 0..dims {
            for b in a..dims {
                covariance[a][b] /= n as f64;
                covariance[b][a] = covariance[a][b];
            }
        }
    }
    SubDistribution {
        members: n,
        mean,
        covariance,
        covariance_defined,
    }
}

pub fn similarity_report(plan: &PartitionPlan, entities: &[EntityFeatures]) -> Result<SimilarityReport, PopError> {
    let dims = validate_features(entities)?;
    if plan.num_entities() != entities.len() {
        return Err(PopError::DimensionMismatch(format!(
            "plan covers {} entities, got {}",
            plan.num_entities(),
            entities.len()
        )));
    }
    let n = entities.len() as f64;
    let mut mu = vec![0.0; dims];
    for e in entities {
        for (m, v) in mu.iter_mut().zip(&e.features) {
            *m += v / n;
        }
    }
    let mut sigma = vec![0.0; dims];
    for e in entities {
        for ((s, v), m) in sigma.iter_mut().zip(&e.features).zip(&mu) {
            *s += (v - m) * (v - m) / n;
        }
    }
    let z: Vec<Vec<f64>> = entities
        .iter()
        .map(|e| {
            e.features
                .iter()
                .zip(mu.iter().zip(&sigma))
                .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s.sqrt() } else { 0.0 })
                .collect()
        })
        .collect();

    let all: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
    let global = summarise(&all, dims);
    let mut subproblems = Vec::with_capacity(plan.k);
    let mut distances = Vec::with_capacity(plan.k);
    for s in 0..plan.k {
        let rows: Vec<&[f64]> = plan.members(s).into_iter().map(|e| z[e].as_slice()).collect();
        let sub = summarise(&rows, dims);
        let mean_gap: f64 = sub
            .mean
            .iter()
            .zip(&global.mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let cov_gap: f64 = sub
            .covariance
            .iter()
            .flatten()
            .zip(global.covariance.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        distances.push(mean_gap + cov_gap);
        subproblems.push(sub);
    }
    Ok(SimilarityReport {
        global,
        subproblems,
        distances,
    })
}
