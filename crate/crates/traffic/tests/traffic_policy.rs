#[path = "../../lp/tests/support/oracles.rs"]
mod oracles;

use pop_core::{partition_random, partition_skewed, replicate_hot, solve_pop, PartitionPlan, SplitStrategy};
use pop_lp::{solve_lp, LinearProgram, SimplexSolver, SolveLimits};
use pop_traffic::{
    attach_paths, build_lp, cspf_baseline, k_shortest_paths, solve_full, total_flow, verify_feasible, DemandConfig,
    GeneratorConfig, Topology, TrafficInstance, TrafficPop,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every simple path from `src` to `dst`, by depth-first search.
fn all_simple_paths(topo: &Topology, src: usize, dst: usize) -> Vec<Vec<usize>> {
    fn walk(topo: &Topology, at: usize, dst: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == dst {
            out.push(path.clone());
            return;
        }
        for &(next, _) in topo.out_edges(at) {
            if !path.contains(&next) {
                path.push(next);
                walk(topo, next, dst, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(topo, src, dst, &mut vec![src], &mut out);
    out
}

#[test]
fn yen_agrees_with_exhaustive_path_listing() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..5 {
        let topo = pop_traffic::generate(
            &GeneratorConfig {
                nodes: 20,
                links: 28,
                ..Default::default()
            },
            seed,
        )
        .unwrap();
        for _ in 0..10 {
            let src = rng.gen_range(0..20);
            let dst = (src + rng.gen_range(1..20)) % 20;
            let paths = k_shortest_paths(&topo, src, dst, 4);
            let mut reference = all_simple_paths(&topo, src, dst);
            reference.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            assert_eq!(paths.len(), reference.len().min(4));
            for p in &paths {
                assert_eq!(p.nodes.first(), Some(&src));
                assert_eq!(p.nodes.last(), Some(&dst));
                let mut seen = p.nodes.clone();
                seen.sort_unstable();
                seen.dedup();
                assert_eq!(seen.len(), p.nodes.len(), "path revisits a node");
                for (w, &e) in p.nodes.windows(2).zip(&p.edges) {
                    assert_eq!((topo.edges[e].src, topo.edges[e].dst), (w[0], w[1]));
                }
                assert!(reference.contains(&p.nodes));
            }
            // Hop counts must be the k smallest available.
            let got: Vec<usize> = paths.iter().map(|p| p.nodes.len()).collect();
            let want: Vec<usize> = reference.iter().take(4).map(Vec::len).collect();
            assert_eq!(got, want);
            // The first path is the lexicographically smallest shortest one.
            if let Some(first) = paths.first() {
                assert_eq!(first.nodes, reference[0]);
            }
        }
    }
}

/// Weak-duality bound for `max c.x, A x <= b, 0 <= x <= u` from any
/// nonnegative row prices.
fn dual_bound(lp: &LinearProgram, prices: &[f64]) -> f64 {
    let mut reduced = lp.objective.clone();
    let mut bound = 0.0;
    for (row, &y) in lp.constraints.iter().zip(prices) {
        let y = y.max(0.0);
        bound += y * row.rhs;
        for &(j, a) in &row.coeffs {
            reduced[j] -= a * y;
        }
    }
    bound
        + reduced
            .iter()
            .zip(&lp.bounds)
            .map(|(r, &(_, hi))| r.max(0.0) * hi)
            .sum::<f64>()
}

#[test]
fn thirty_node_optimum_is_certified_by_its_duals() {
    let topo_cfg = GeneratorConfig {
        nodes: 30,
        links: 50,
        ..Default::default()
    };
    for seed in 0..3 {
        let inst = TrafficInstance::generate(
            &topo_cfg,
            &DemandConfig {
                commodities: 200,
                ..Default::default()
            },
            seed,
        )
        .unwrap();
        assert_eq!(inst.topology.num_edges(), 100);
        let (lp, _) = build_lp(&inst.topology, &inst.commodities);
        let r = solve_lp(&lp, &SolveLimits::default());
        assert!(r.is_optimal());
        let upper = dual_bound(&lp, &r.duals);
        assert!(lp.is_feasible(&r.primal, 1e-6));
        assert!(
            upper - r.objective <= 1e-6 * r.objective.max(1.0),
            "gap {} at seed {seed}",
            upper - r.objective
        );
    }
}

#[test]
fn tiny_instances_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 20 {
        let n = 4;
        let mut links = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.6) {
                    links.push((a, b, rng.gen_range(1.0..10.0)));
                }
            }
        }
        let topo = Topology::from_undirected((0..n).map(|i| i.to_string()).collect(), links).unwrap();
        let demands: Vec<_> = (0..3)
            .map(|_| {
                let s = rng.gen_range(0..n);
                (s, (s + rng.gen_range(1..n)) % n, rng.gen_range(1.0..12.0))
            })
            .collect();
        let (cs, _) = attach_paths(&topo, &demands, 2).unwrap();
        let (lp, _) = build_lp(&topo, &cs);
        if lp.num_vars() == 0 || lp.num_vars() > 6 {
            continue;
        }
        let sol = solve_full(&topo, &cs, 2, &SimplexSolver::default()).unwrap();
        let oracle = oracles::vertex_enumeration(&lp).expect("zero flow is always feasible");
        assert!((sol.total - oracle).abs() < 1e-6, "{} vs {oracle}", sol.total);
        checked += 1;
    }
}

fn instance(seed: u64, commodities: usize) -> TrafficInstance {
    let topo = GeneratorConfig {
        nodes: 30,
        links: 50,
        ..Default::default()
    };
    TrafficInstance::generate(
        &topo,
        &DemandConfig {
            commodities,
            ..Default::default()
        },
        seed,
    )
    .unwrap()
}

fn pop_flow(inst: &TrafficInstance, plan: &PartitionPlan) -> f64 {
    let solver = SimplexSolver::default();
    let (flows, _) = solve_pop(
        &TrafficPop {
            instance: inst,
            solver: &solver,
        },
        plan,
        2,
    )
    .unwrap();
    assert!(verify_feasible(&inst.topology, &inst.commodities, &flows).is_feasible());
    total_flow(&flows)
}

#[test]
fn pop_is_feasible_and_never_beats_full() {
    let solver = SimplexSolver::default();
    for seed in 0..3 {
        let inst = instance(seed, 300);
        let full = solve_full(&inst.topology, &inst.commodities, 4, &solver).unwrap().total;
        let caps = inst.topology.capacities();
        let feats = inst.features();
        for k in [1, 2, 4, 8] {
            let random = partition_random(&feats, &caps, k, seed, SplitStrategy::CapacitySplit).unwrap();
            let flow = pop_flow(&inst, &random);
            assert!(flow <= full + 1e-6, "k={k}: {flow} > {full}");
            if k == 1 {
                assert!((flow - full).abs() <= 1e-6 * full);
            } else {
                let skewed = partition_skewed(&feats, &caps, k, 0, seed, SplitStrategy::CapacitySplit).unwrap();
                assert!(pop_flow(&inst, &skewed) <= full + 1e-6);
            }
        }
    }
}

#[test]
fn raising_a_capacity_never_lowers_flow() {
    let solver = SimplexSolver::default();
    let inst = instance(5, 150);
    let base = solve_full(&inst.topology, &inst.commodities, 4, &solver).unwrap().total;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let mut caps = inst.topology.capacities();
        let e = rng.gen_range(0..caps.len());
        caps[e] *= 1.5;
        let topo = inst.topology.with_capacities(&caps);
        let raised = solve_full(&topo, &inst.commodities, 4, &solver).unwrap().total;
        assert!(raised >= base - 1e-6);
    }
}

#[test]
fn cspf_is_feasible_and_below_the_lp() {
    let solver = SimplexSolver::default();
    for seed in 0..3 {
        let inst = instance(seed, 300);
        let flows = cspf_baseline(&inst.topology, &inst.commodities, 4, seed);
        assert!(verify_feasible(&inst.topology, &inst.commodities, &flows).is_feasible());
        let lp = solve_full(&inst.topology, &inst.commodities, 4, &solver).unwrap().total;
        let greedy = total_flow(&flows);
        assert!(greedy <= lp + 1e-6);
        eprintln!("seed {seed}: cspf {greedy:.1} vs lp {lp:.1} ({:.3})", greedy / lp);
    }
}

#[test]
fn replicated_commodities_remain_feasible() {
    let inst = instance(2, 200);
    let feats = inst.features();
    let plan = partition_random(&feats, &inst.topology.capacities(), 4, 0, SplitStrategy::CapacitySplit).unwrap();
    // Feature 2 is demand.
    let plan = replicate_hot(&plan, &feats, 2, 2.0).unwrap();
    assert!((0..inst.commodities.len()).any(|j| plan.is_replicated(j)));
    pop_flow(&inst, &plan);
}

#[test]
fn random_split_beats_skewed_split_on_average() {
    let (mut random, mut skewed) = (0.0, 0.0);
    for seed in 0..20 {
        let inst = instance(seed, 300);
        let caps = inst.topology.capacities();
        let feats = inst.features();
        random += pop_flow(
            &inst,
            &partition_random(&feats, &caps, 4, seed, SplitStrategy::CapacitySplit).unwrap(),
        );
        skewed += pop_flow(
            &inst,
            &partition_skewed(&feats, &caps, 4, 0, seed, SplitStrategy::CapacitySplit).unwrap(),
        );
    }
    assert!(random > skewed, "random {random} vs skewed {skewed}");
}
