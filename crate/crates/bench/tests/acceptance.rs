//! End-to-end acceptance checks, one line per criterion. Runs sequentially
//! (timings matter) and exits non-zero when any criterion fails. Pass
//! criterion numbers as arguments to run a subset.

#[path = "../../lp/tests/support/oracles.rs"]
mod oracles;

#[path = "../../cluster/tests/support/grid.rs"]
mod grid;

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pop_bench::{
    run_experiment, scaling_sweep, Domain, ExperimentConfig, Partitioner, Problem, Status, TradeoffRecord,
};
use pop_lp::{solve_lp, solve_milp, MixedIntegerProgram, Sense, SolveLimits, SolveStatus, FEAS_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Verdict = Result<String, String>;

const SEEDS: std::ops::Range<u64> = 0..10;

fn generator(domain: Domain) -> serde_json::Value {
    match domain {
        Domain::Cluster => json!({}),
        Domain::Traffic => json!({"topology": {"nodes": 40, "links": 60}, "demand": {"commodities": 1000}}),
        Domain::LoadBalance => json!({"shards": 24}),
    }
}

/// Sub-problem counts to sweep. Load balancing deals whole servers, so its
/// four servers allow at most four parts.
fn k_values(domain: Domain) -> Vec<usize> {
    match domain {
        Domain::LoadBalance => vec![2, 4],
        _ => vec![2, 4, 8],
    }
}

fn experiment(domain: Domain, dir: &Path, k_list: Vec<usize>, partitioner: Partitioner) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(domain, dir);
    c.seeds = SEEDS.collect();
    c.generator = generator(domain);
    c.k_list = k_list;
    c.partitioner = partitioner;
    c.baseline = false;
    c
}

fn run(config: &ExperimentConfig) -> Result<Vec<TradeoffRecord>, String> {
    run_experiment(config).map(|r| r.records).map_err(|e| e.to_string())
}

fn full_objectives(records: &[TradeoffRecord]) -> Result<BTreeMap<u64, f64>, String> {
    records
        .iter()
        .filter(|r| r.method == "full")
        .map(|r| match (r.status, r.objective, r.feasible) {
            (Status::Optimal, Some(v), true) => Ok((r.seed, v)),
            _ => Err(format!(
                "{} seed {}: full solve {} ({:?})",
                r.domain, r.seed, r.status, r.message
            )),
        })
        .collect()
}

/// Every partitioned run either solved, giving a feasible allocation, or
/// hit an infeasible sub-problem. Returns the solved ones.
fn solved_pop_runs(records: &[TradeoffRecord]) -> Result<Vec<&TradeoffRecord>, String> {
    let mut solved = Vec::new();
    for r in records.iter().filter(|r| r.method.starts_with("pop-")) {
        match r.status {
            Status::Optimal if r.feasible => solved.push(r),
            Status::Optimal => {
                return Err(format!(
                    "{} seed {} {}: infeasible allocation ({:?})",
                    r.domain, r.seed, r.method, r.message
                ))
            }
            Status::Infeasible => {}
            other => {
                return Err(format!(
                    "{} seed {} {}: {other} ({:?})",
                    r.domain, r.seed, r.method, r.message
                ))
            }
        }
    }
    Ok(solved)
}

fn k_one_equivalence() -> Verdict {
    let mut notes = Vec::new();
    for domain in Domain::ALL {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let start = Instant::now();
        let records = run(&experiment(domain, dir.path(), vec![1], Partitioner::Random))?;
        let elapsed = start.elapsed();
        let full = full_objectives(&records)?;
        let solved = solved_pop_runs(&records)?;
        if solved.len() != full.len() {
            return Err(format!(
                "{domain}: only {} of {} POP-1 runs solved",
                solved.len(),
                full.len()
            ));
        }
        let mut worst: f64 = 0.0;
        for r in solved {
            let (a, b) = (full[&r.seed], r.objective.unwrap());
            let rel = (a - b).abs() / a.abs().max(1e-12);
            if a == b {
                continue;
            }
            if rel > 1e-6 {
                return Err(format!("{domain} seed {}: full {a} vs POP-1 {b}", r.seed));
            }
            worst = worst.max(rel);
        }
        if elapsed > Duration::from_secs(60) {
            return Err(format!("{domain} suite took {:.1} s", elapsed.as_secs_f64()));
        }
        notes.push(format!(
            "{domain} {:.1} s, worst rel diff {worst:.1e}",
            elapsed.as_secs_f64()
        ));
    }
    Ok(notes.join("; "))
}

/// Criteria 2 and 3 share one set of runs.
struct Sweep {
    checked: usize,
    infeasible_subproblems: usize,
    violations: Vec<String>,
}

fn bounds_and_feasibility() -> Result<Sweep, String> {
    let mut out = Sweep {
        checked: 0,
        infeasible_subproblems: 0,
        violations: Vec::new(),
    };
    for domain in Domain::ALL {
        for partitioner in [Partitioner::Random, Partitioner::Stratified, Partitioner::Skewed] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let records = run(&experiment(domain, dir.path(), k_values(domain), partitioner))?;
            let full = full_objectives(&records)?;
            out.infeasible_subproblems += records.iter().filter(|r| r.status == Status::Infeasible).count();
            for r in solved_pop_runs(&records)? {
                out.checked += 1;
                let (best, got) = (full[&r.seed], r.objective.unwrap());
                let ok = match domain.sense() {
                    Sense::Maximize => got <= best + 1e-6,
                    Sense::Minimize => got >= best - 1e-6,
                };
                if !ok {
                    out.violations.push(format!(
                        "{domain} {partitioner} seed {} {}: {got} vs full {best}",
                        r.seed, r.method
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn bound_direction(sweep: &Result<Sweep, String>) -> Verdict {
    let s = sweep.as_ref().map_err(Clone::clone)?;
    if !s.violations.is_empty() {
        return Err(format!("{} violations, first: {}", s.violations.len(), s.violations[0]));
    }
    Ok(format!(
        "{} POP runs within bound ({} runs stopped at an infeasible sub-problem)",
        s.checked, s.infeasible_subproblems
    ))
}

fn feasibility(sweep: &Result<Sweep, String>) -> Verdict {
    // `solved_pop_runs` rejects any solved run whose coalesced allocation
    // fails the domain check. Criterion 1's runs go through it too.
    let s = sweep.as_ref().map_err(Clone::clone)?;
    Ok(format!(
        "{} coalesced allocations feasible against the original instances",
        s.checked
    ))
}

fn solver_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let limits = SolveLimits::default();
    let mut infeasible = 0;
    for case in 0..200 {
        let lp = oracles::random_small_lp(&mut rng);
        let r = solve_lp(&lp, &limits);
        match oracles::vertex_enumeration(&lp) {
            None => {
                infeasible += 1;
                if r.status != SolveStatus::Infeasible {
                    return Err(format!("LP {case}: oracle infeasible, solver {:?}", r.status));
                }
            }
            Some(v) => {
                if r.status != SolveStatus::Optimal || (r.objective - v).abs() > 1e-6 * (1.0 + v.abs()) {
                    return Err(format!(
                        "LP {case}: solver {:?} {} vs oracle {v}",
                        r.status, r.objective
                    ));
                }
                if !lp.is_feasible(&r.primal, FEAS_TOL) {
                    return Err(format!("LP {case}: solver point infeasible"));
                }
            }
        }
    }
    for case in 0..100 {
        let binaries = rng.gen_range(1..=12);
        let (lp, nb) = oracles::random_small_milp(&mut rng, binaries);
        let mut mip = MixedIntegerProgram::new(lp.clone());
        (0..nb).for_each(|j| mip.mark_integer(j));
        let r = solve_milp(&mip, &limits);
        match oracles::binary_enumeration(&lp, nb) {
            None if r.status == SolveStatus::Infeasible => {}
            Some(v) if r.status == SolveStatus::Optimal && (r.objective - v).abs() <= 1e-9 * v.abs().max(1.0) => {}
            want => {
                return Err(format!(
                    "MILP {case}: solver {:?} {} vs oracle {want:?}",
                    r.status, r.objective
                ))
            }
        }
    }
    let mut widest: f64 = 0.0;
    for seed in 0..20 {
        let inst = grid::six_job_instance(seed);
        let lp = pop_cluster::solve_full(&inst, &pop_lp::SimplexSolver::default()).map_err(|e| e.to_string())?;
        let best = grid::grid_optimum(&inst);
        let resolution = grid::step_sensitivity(&inst);
        if best > lp.objective + 1e-7 || lp.objective - best > resolution + 1e-7 {
            return Err(format!(
                "cluster {seed}: LP {} vs grid {best} (resolution {resolution})",
                lp.objective
            ));
        }
        widest = widest.max(lp.objective - best);
    }
    Ok(format!(
        "200 LPs ({infeasible} infeasible), 100 MILPs, 20 cluster grids (largest LP-grid gap {widest:.3})"
    ))
}

/// Flow of the full solve and of random and skewed POP-4 on the 100 node /
/// 5000 commodity instances, one entry per seed.
struct QualityRuns {
    full: Vec<f64>,
    random: Vec<f64>,
    skewed: Vec<f64>,
}

fn quality_runs() -> Result<QualityRuns, String> {
    let mut runs = QualityRuns {
        full: Vec::new(),
        random: Vec::new(),
        skewed: Vec::new(),
    };
    let objective = |o: pop_bench::Outcome, what: &str, seed: u64| -> Result<f64, String> {
        match (o.status, o.objective, o.feasible()) {
            (Status::Optimal, Some(v), true) => Ok(v),
            _ => Err(format!("seed {seed} {what}: {} ({:?})", o.status, o.message)),
        }
    };
    for seed in 0..20 {
        let p = Problem::generate(Domain::Traffic, &serde_json::Value::Null, seed).map_err(|e| e.to_string())?;
        runs.full.push(objective(p.solve_full(None), "full", seed)?);
        runs.random.push(objective(
            p.solve_pop(4, Partitioner::Random, seed, None, 1, None),
            "random",
            seed,
        )?);
        runs.skewed.push(objective(
            p.solve_pop(4, Partitioner::Skewed, seed, None, 1, None),
            "skewed",
            seed,
        )?);
    }
    Ok(runs)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn quality_trend(runs: &Result<QualityRuns, String>) -> Verdict {
    let q = runs.as_ref().map_err(Clone::clone)?;
    let ratio = mean(&q.random) / mean(&q.full);
    let per_seed: Vec<f64> = q.random.iter().zip(&q.full).map(|(p, f)| p / f).collect();
    let (lo, hi) = per_seed
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    let text = format!(
        "POP-4 mean flow is {:.1}% of full (per seed {:.3}..{:.3})",
        100.0 * ratio,
        lo,
        hi
    );
    if ratio >= 0.95 {
        Ok(text)
    } else {
        Err(format!("{text}, needs 95%"))
    }
}

/// P(X >= wins) for X ~ Binomial(n, 1/2).
fn sign_test_p(wins: usize, n: usize) -> f64 {
    let mut p = 0.0;
    let mut choose = 1.0f64;
    for i in 0..=n {
        if i >= wins {
            p += choose;
        }
        choose = choose * (n - i) as f64 / (i + 1) as f64;
    }
    p / 2f64.powi(n as i32)
}

fn skewed_split(runs: &Result<QualityRuns, String>) -> Verdict {
    let q = runs.as_ref().map_err(Clone::clone)?;
    let wins = q.random.iter().zip(&q.skewed).filter(|(r, s)| r > s).count();
    let losses = q.random.iter().zip(&q.skewed).filter(|(r, s)| r < s).count();
    let p = sign_test_p(wins, wins + losses);
    let (mr, ms) = (mean(&q.random), mean(&q.skewed));
    let text = format!(
        "random {mr:.1} vs skewed {ms:.1}, random ahead on {wins} of {} seeds, p = {p:.2e}",
        wins + losses
    );
    if mr > ms && p < 0.05 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn runtime_trend() -> Verdict {
    let sizes: Vec<usize> = (1..=8).map(|i| 50 * i).collect();
    let report = scaling_sweep(
        Domain::Traffic,
        &sizes,
        8,
        0,
        1,
        Duration::from_secs(300),
        Some(Duration::from_secs(60)),
    )
    .map_err(|e| e.to_string())?;
    let trail: Vec<String> = report
        .points
        .iter()
        .map(|p| format!("n={} {:.1}s", p.size, p.full_ms / 1e3))
        .collect();
    let largest = report
        .points
        .iter()
        .rev()
        .find(|p| p.full_status == Status::Optimal && (60e3..=300e3).contains(&p.full_ms))
        .ok_or_else(|| format!("no size with a 60-300 s full solve: {}", trail.join(", ")))?;
    if largest.pop_status != Status::Optimal {
        return Err(format!("POP-8 at n={} ended {}", largest.size, largest.pop_status));
    }
    let slope = report.slope.ok_or("too few points for a slope")?;
    let text = format!(
        "n={}: full {:.1} s vs POP-8 critical path {:.2} s; slope {slope:.2} over {}",
        largest.size,
        largest.full_ms / 1e3,
        largest.pop_ms / 1e3,
        trail.join(", ")
    );
    if largest.pop_ms < largest.full_ms && slope > 1.0 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn replication() -> Verdict {
    let p = Problem::LoadBalance(pop_loadbalance::hot_shard_instance());
    let plain = p.solve_pop(2, Partitioner::Random, 0, None, 1, None);
    if plain.status != Status::Infeasible {
        return Err(format!("without replication POP-2 ended {}", plain.status));
    }
    let replicated = p.solve_pop(2, Partitioner::Random, 0, Some(2.0), 1, None);
    if replicated.status != Status::Optimal || !replicated.feasible() {
        return Err(format!(
            "with replication POP-2 ended {} ({:?})",
            replicated.status, replicated.message
        ));
    }
    Ok(format!(
        "POP-2 infeasible without replication, feasible with it (movement cost {})",
        replicated.objective.unwrap_or(f64::NAN)
    ))
}

fn determinism() -> Verdict {
    const FILES: [&str; 2] = ["records.csv", "infeasible.csv"];
    let mut compared = 0;
    for (domain, k_list) in [
        (Domain::Traffic, vec![1, 2, 4, 8]),
        (Domain::LoadBalance, vec![1, 2, 4]),
    ] {
        let mut outputs = Vec::new();
        for parallelism in [4, 4, 1] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let mut c = experiment(domain, dir.path(), k_list.clone(), Partitioner::Random);
            c.seeds = vec![0, 1, 2];
            c.parallelism = parallelism;
            c.baseline = true;
            run(&c)?;
            let mut bytes = Vec::new();
            for f in FILES {
                bytes.push(std::fs::read(dir.path().join(f)).map_err(|e| e.to_string())?);
            }
            let mut dumps: Vec<_> = std::fs::read_dir(dir.path().join("allocations"))
                .map_err(|e| e.to_string())?
                .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            dumps.sort();
            for d in dumps {
                bytes.push(std::fs::read(d).map_err(|e| e.to_string())?);
            }
            outputs.push(bytes);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{domain}: outputs differ between runs"));
        }
        compared += outputs[0].len();
    }
    Ok(format!(
        "{compared} files byte-identical over two runs at parallelism 4 and one at 1"
    ))
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |n: usize| wanted.is_empty() || wanted.contains(&n);
    let mut results: Vec<(usize, &str, Verdict, Duration)> = Vec::new();
    let mut record = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        if selected(n) {
            let start = Instant::now();
            let verdict = f();
            let line = match &verdict {
                Ok(m) => format!("PASS {n} {name}: {m}"),
                Err(m) => format!("FAIL {n} {name}: {m}"),
            };
            println!("{line} [{:.1} s]", start.elapsed().as_secs_f64());
            results.push((n, name, verdict, start.elapsed()));
        }
    };

    record(1, "k=1 equivalence", &mut k_one_equivalence);
    // Shared runs are timed under the first criterion that needs them.
    let sweep = OnceCell::new();
    record(2, "bound direction", &mut || {
        bound_direction(sweep.get_or_init(bounds_and_feasibility))
    });
    record(3, "feasibility", &mut || {
        feasibility(sweep.get_or_init(bounds_and_feasibility))
    });
    record(4, "solver oracles", &mut solver_oracles);
    let quality = OnceCell::new();
    record(5, "quality trend", &mut || {
        quality_trend(quality.get_or_init(quality_runs))
    });
    record(6, "skewed-split ablation", &mut || {
        skewed_split(quality.get_or_init(quality_runs))
    });
    record(7, "runtime trend", &mut runtime_trend);
    record(8, "replication", &mut replication);
    record(9, "determinism", &mut determinism);

    let failed = results.iter().filter(|r| r.2.is_err()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
