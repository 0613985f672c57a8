use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::PopError;

/// How resource capacity is handed to sub-problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitStrategy {
    /// Every sub-problem sees every resource at `1/k` of its capacity.
    CapacitySplit,
    /// Capacities are counts of indivisible units (workers, servers); whole
    /// units are dealt round-robin to sub-problems, the dealing cursor
    /// carrying over from one resource to the next.
    DisjointPartition,
}

/// Splits `capacities` into `k` per-sub-problem share vectors whose column
/// sums reproduce the original capacities.
pub fn split_resources(capacities: &[f64], k: usize, strategy: SplitStrategy) -> Result<Vec<Vec<f64>>, PopError> {
    if k == 0 {
        return Err(PopError::InvalidK { k, entities: 0 });
    }
    let mut shares = vec![vec![0.0; capacities.len()]; k];
    match strategy {
        SplitStrategy::CapacitySplit => {
            for (r, &c) in capacities.iter().enumerate() {
                let part = c / k as f64;
                for share in shares.iter_mut().take(k - 1) {
                    share[r] = part;
                }
                // The remainder absorbs rounding so the column sums to c.
                shares[k - 1][r] = c - part * (k - 1) as f64;
            }
        }
        SplitStrategy::DisjointPartition => {
            let mut cursor = 0usize;
            for (r, &c) in capacities.iter().enumerate() {
                if c < 0.0 || c.fract() != 0.0 || !c.is_finite() {
                    return Err(PopError::FractionalUnits {
                        resource: r,
                        capacity: c,
                    });
                }
                let units = c as u64;
                let base = units / k as u64;
                let extra = (units % k as u64) as usize;
                for share in shares.iter_mut() {
                    share[r] = base as f64;
                }
                for step in 0..extra {
                    shares[(cursor + step) % k][r] += 1.0;
                }
                cursor = (cursor + extra) % k;
            }
        }
    }
    Ok(shares)
}

/// Assignment of entities (by position in the instance's entity list) to
/// `k` sub-problems, together with each sub-problem's resource shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub k: usize,
    pub strategy: SplitStrategy,
    /// Per entity, the ascending list of sub-problems holding it.
    pub assignment: Vec<Vec<usize>>,
    /// `resource_shares[s][r]`: capacity of resource `r` in sub-problem `s`.
    pub resource_shares: Vec<Vec<f64>>,
    /// For replicated entities, the fraction of demand each sub-problem
    /// carries (length `k`, zero where the entity is absent).
    pub replication_weights: BTreeMap<usize, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PartitionPlan {
    /// Builds a plan from a singleton sub-problem index per entity.
    pub fn from_owners(owners: &[usize], k: usize, resource_shares: Vec<Vec<f64>>, strategy: SplitStrategy) -> Self {
        Self {
            k,
            strategy,
            assignment: owners.iter().map(|&s| vec![s]).collect(),
            resource_shares,
            replication_weights: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn num_entities(&self) -> usize {
        self.assignment.len()
    }

    /// Entities of sub-problem `sub`, ascending.
    pub fn members(&self, sub: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, subs)| subs.contains(&sub))
            .map(|(e, _)| e)
            .collect()
    }

    pub fn is_replicated(&self, entity: usize) -> bool {
        self.replication_weights.contains_key(&entity)
    }

    /// Fraction of `entity`'s demand carried by sub-problem `sub`.
    pub fn weight(&self, entity: usize, sub: usize) -> f64 {
        match self.replication_weights.get(&entity) {
            Some(w) => w[sub],
            None if self.assignment[entity].contains(&sub) => 1.0,
            None => 0.0,
        }
    }

    /// Checks the structural invariants against the original capacities.
    pub fn check(&self, capacities: &[f64]) -> Result<(), PopError> {
        let bad = |msg: String| Err(PopError::DimensionMismatch(msg));
        if self.k == 0 {
            return Err(PopError::InvalidK {
                k: 0,
                entities: self.num_entities(),
            });
        }
        if self.resource_shares.len() != self.k {
            return bad(format!("{} share rows for k = {}", self.resource_shares.len(), self.k));
        }
        for (e, subs) in self.assignment.iter().enumerate() {
            if subs.is_empty() || subs.iter().any(|&s| s >= self.k) {
                return bad(format!("entity {e} has assignment {subs:?}"));
            }
        }
        for (r, &c) in capacities.iter().enumerate() {
            if self.resource_shares.iter().any(|s| s.len() != capacities.len()) {
                return bad("share row width".into());
            }
            let total: f64 = self.resource_shares.iter().map(|s| s[r]).sum();
            if (total - c).abs() > 1e-9 * c.abs().max(1.0) || self.resource_shares.iter().any(|s| s[r] < 0.0) {
                return bad(format!("resource {r} shares sum to {total}, capacity {c}"));
            }
        }
        for (&e, w) in &self.replication_weights {
            let sum: f64 = w.iter().sum();
            if w.len() != self.k || (sum - 1.0).abs() > 1e-9 {
                return bad(format!("replication weights of entity {e} sum to {sum}"));
            }
        }
        Ok(())
    }
}
