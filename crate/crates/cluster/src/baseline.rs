use pop_core::AllocationMatrix;

use crate::instance::ClusterInstance;

/// Priority-ordered greedy: jobs by descending priority (then id) each take
/// their fastest type that still has free workers, as much of it as fits.
pub fn greedy_baseline(instance: &ClusterInstance) -> AllocationMatrix {
    let types = instance.num_types();
    let mut free = instance.cluster.num_workers.clone();
    let mut order: Vec<usize> = (0..instance.jobs.len()).collect();
    order.sort_by(|&a, &b| {
        let (ja, jb) = (&instance.jobs[a], &instance.jobs[b]);
        jb.priority.total_cmp(&ja.priority).then(ja.id.cmp(&jb.id))
    });
    let mut x = AllocationMatrix::zeros(instance.jobs.len(), types);
    for m in order {
        let job = &instance.jobs[m];
        let best = (0..types)
            .filter(|&j| free[j] > 1e-12 && job.throughputs[j] > 0.0)
            .max_by(|&a, &b| job.throughputs[a].total_cmp(&job.throughputs[b]).then(b.cmp(&a)));
        if let Some(j) = best {
            let z = job.gpu_request as f64;
            let share = (free[j] / z).min(1.0);
            x.set(m, j, share);
            free[j] = (free[j] - share * z).max(0.0);
        }
    }
    x
}
