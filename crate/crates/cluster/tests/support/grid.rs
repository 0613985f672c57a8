//! Grid-search reference for the max-min policy on two worker types. It
//! recomputes job values from scratch instead of calling into the crate.

#![allow(dead_code)]

use pop_cluster::{ClusterInstance, ClusterSpec, Job};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 0.05;

/// Per-job value `(z/w) * T.x / T.x_equal`, computed independently of the crate.
pub fn job_value(inst: &ClusterInstance, m: usize, x: &[f64]) -> f64 {
    let n = inst.jobs.len() as f64;
    let job = &inst.jobs[m];
    let z = job.gpu_request as f64;
    let mut eq: Vec<f64> = inst
        .cluster
        .num_workers
        .iter()
        .map(|w| (w / (n * z)).min(1.0))
        .collect();
    let s: f64 = eq.iter().sum();
    if s > 1.0 {
        eq.iter_mut().for_each(|v| *v /= s);
    }
    let dot = |y: &[f64]| job.throughputs.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    z / job.priority * dot(x) / dot(&eq)
}

/// Whether some grid allocation (two types, step 0.05) gives every job at
/// least `target`. Each job only needs the cheapest second-type share for
/// each first-type share, which keeps the search small.
pub fn grid_reaches(inst: &ClusterInstance, target: f64) -> bool {
    let steps = (1.0 / STEP).round() as usize;
    let options: Vec<Vec<(f64, f64)>> = (0..inst.jobs.len())
        .map(|m| {
            let z = inst.jobs[m].gpu_request as f64;
            (0..=steps)
                .filter_map(|a| {
                    (0..=steps - a).find_map(|b| {
                        let x = [a as f64 * STEP, b as f64 * STEP];
                        (job_value(inst, m, &x) >= target - 1e-12).then_some((x[0] * z, x[1] * z))
                    })
                })
                .collect()
        })
        .collect();
    fn dfs(options: &[Vec<(f64, f64)>], m: usize, left: (f64, f64)) -> bool {
        if m == options.len() {
            return true;
        }
        options[m]
            .iter()
            .any(|&(a, b)| a <= left.0 + 1e-12 && b <= left.1 + 1e-12 && dfs(options, m + 1, (left.0 - a, left.1 - b)))
    }
    let caps = &inst.cluster.num_workers;
    dfs(&options, 0, (caps[0], caps[1]))
}

/// Best max-min value over the grid, by bisection on the target.
pub fn grid_optimum(inst: &ClusterInstance) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while grid_reaches(inst, hi) {
        hi *= 2.0;
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if grid_reaches(inst, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn six_job_instance(seed: u64) -> ClusterInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (0..6)
        .map(|id| Job {
            id,
            priority: [1.0, 2.0][rng.gen_range(0..2)],
            gpu_request: rng.gen_range(1..=2),
            throughputs: (0..2).map(|_| rng.gen_range(0.2f64..5.0)).collect(),
        })
        .collect();
    ClusterInstance {
        jobs,
        cluster: ClusterSpec {
            types: vec!["a".into(), "b".into()],
            num_workers: vec![2.0, 2.0],
        },
    }
}

/// Largest change in any job's value from moving one grid step on one type.
pub fn step_sensitivity(inst: &ClusterInstance) -> f64 {
    (0..inst.jobs.len())
        .flat_map(|m| [[STEP, 0.0], [0.0, STEP]].map(|x| job_value(inst, m, &x)))
        .fold(0.0, f64::max)
}
