//! Entity partitioners. All of them are deterministic in their inputs and
//! seed, and hand resources out through [`split_resources`].

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{split_resources, validate_features, EntityFeatures, PartitionPlan, PopError, SplitStrategy};

fn check_k(k: usize, n: usize) -> Result<(), PopError> {
    if k == 0 || k > n {
        return Err(PopError::InvalidK { k, entities: n });
    }
    Ok(())
}

fn check_index(index: usize, dims: usize) -> Result<(), PopError> {
    if index >= dims {
        return Err(PopError::FeatureIndex { index, dims });
    }
    Ok(())
}

/// Seeded Fisher-Yates shuffle of the entities, then round-robin dealing.
pub fn partition_random(
    entities: &[EntityFeatures],
    capacities: &[f64],
    k: usize,
    seed: u64,
    strategy: SplitStrategy,
) -> Result<PartitionPlan, PopError> {
    validate_features(entities)?;
    let n = entities.len();
    check_k(k, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut owners = vec![0; n];
    for (slot, &e) in order.iter().enumerate() {
        owners[e] = slot % k;
    }
    let shares = split_resources(capacities, k, strategy)?;
    Ok(PartitionPlan::from_owners(&owners, k, shares, strategy))
}

/// Equal-frequency bin index of every entity along feature `dim`.
fn equal_frequency_bins(entities: &[EntityFeatures], dim: usize, bins: usize) -> Vec<usize> {
    let n = entities.len();
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| {
        entities[a].features[dim]
            .total_cmp(&entities[b].features[dim])
            .then(a.cmp(&b))
    });
    let mut bin = vec![0; n];
    for (rank, &e) in ranked.iter().enumerate() {
        bin[e] = rank * bins / n;
    }
    bin
}

/// Stratified sampling: entities are binned into `bins` equal-frequency
/// strata along each of `strata_dims`, and every stratum (the tuple of
/// per-dimension bins) is shuffled and dealt round-robin, so each
/// sub-problem receives a near-equal share of every stratum.
///
/// With no stratification dimensions this falls back to
/// [`partition_random`] and records a warning on the plan.
pub fn partition_stratified(
    entities: &[EntityFeatures],
    capacities: &[f64],
    k: usize,
    strata_dims: &[usize],
    bins: usize,
    seed: u64,
    strategy: SplitStrategy,
) -> Result<PartitionPlan, PopError> {
    let dims = validate_features(entities)?;
    let n = entities.len();
    check_k(k, n)?;
    if strata_dims.is_empty() {
        log::warn!("no stratification dimensions given, falling back to a random partition");
        let mut plan = partition_random(entities, capacities, k, seed, strategy)?;
        plan.warnings
            .push("stratified partition without dimensions fell back to random".into());
        return Ok(plan);
    }
    for &d in strata_dims {
        check_index(d, dims)?;
    }
    let bins = bins.clamp(1, n);
    let per_dim: Vec<Vec<usize>> = strata_dims
        .iter()
        .map(|&d| equal_frequency_bins(entities, d, bins))
        .collect();
    let mut strata: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for e in 0..n {
        let key = per_dim.iter().map(|b| b[e]).collect();
        strata.entry(key).or_default().push(e);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owners = vec![0; n];
    let mut cursor = 0;
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
        for &e in members.iter() {
            owners[e] = cursor % k;
            cursor += 1;
        }
    }
    let shares = split_resources(capacities, k, strategy)?;
    Ok(PartitionPlan::from_owners(&owners, k, shares, strategy))
}

/// Deliberately skewed split for ablations: every entity sharing a value of
/// the categorical feature `group_key` lands in the same sub-problem. Groups
/// are dealt round-robin by descending size (equal sizes in seeded order).
pub fn partition_skewed(
    entities: &[EntityFeatures],
    capacities: &[f64],
    k: usize,
    group_key: usize,
    seed: u64,
    strategy: SplitStrategy,
) -> Result<PartitionPlan, PopError> {
    let dims = validate_features(entities)?;
    check_index(group_key, dims)?;
    let n = entities.len();
    check_k(k, n)?;

    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| {
        entities[a].features[group_key]
            .total_cmp(&entities[b].features[group_key])
            .then(a.cmp(&b))
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for e in by_value {
        let v = entities[e].features[group_key];
        if last != Some(v) {
            groups.push(Vec::new());
            last = Some(v);
        }
        groups.last_mut().expect("group pushed above").push(e);
    }
    if groups.len() < k {
        return Err(PopError::TooFewGroups {
            groups: groups.len(),
            k,
        });
    }
    groups.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));

    let mut owners = vec![0; n];
    for (g, members) in groups.iter().enumerate() {
        for &e in members {
            owners[e] = g % k;
        }
    }
    let shares = split_resources(capacities, k, strategy)?;
    Ok(PartitionPlan::from_owners(&owners, k, shares, strategy))
}

/// Places every entity whose `load_feature` exceeds `threshold` times the
/// mean load into all `k` sub-problems, each carrying `1/k` of it.
pub fn replicate_hot(
    plan: &PartitionPlan,
    entities: &[EntityFeatures],
    load_feature: usize,
    threshold: f64,
) -> Result<PartitionPlan, PopError> {
    let dims = validate_features(entities)?;
    check_index(load_feature, dims)?;
    if entities.len() != plan.num_entities() {
        return Err(PopError::DimensionMismatch(format!(
            "plan covers {} entities, got {}",
            plan.num_entities(),
            entities.len()
        )));
    }
    if !(threshold > 0.0) {
        return Err(PopError::Domain(format!(
            "hotness threshold must be positive, got {threshold}"
        )));
    }
    let mean = entities.iter().map(|e| e.features[load_feature]).sum::<f64>() / entities.len() as f64;
    let mut out = plan.clone();
    let k = plan.k;
    for (e, ent) in entities.iter().enumerate() {
        if ent.features[load_feature] > threshold * mean {
            out.assignment[e] = (0..k).collect();
            out.replication_weights.insert(e, vec![1.0 / k as f64; k]);
        }
    }
    Ok(out)
}
