mod support;

use pop_lp::{
    solve_lp, solve_max_min, solve_milp, LinearProgram, MaxMinProblem, MixedIntegerProgram, RatioTerm, Relation, Sense,
    SolveLimits, SolveStatus, FEAS_TOL,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles::{binary_enumeration, random_small_lp, random_small_milp, vertex_enumeration};

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut infeasible = 0;
    for case in 0..200 {
        let lp = random_small_lp(&mut rng);
        let r = solve_lp(&lp, &SolveLimits::default());
        match vertex_enumeration(&lp) {
            None => {
                infeasible += 1;
                assert_eq!(r.status, SolveStatus::Infeasible, "case {case}");
            }
            Some(v) => {
                assert_eq!(r.status, SolveStatus::Optimal, "case {case}");
                assert!(
                    (r.objective - v).abs() <= 1e-6 * (1.0 + v.abs()),
                    "case {case}: {} vs {v}",
                    r.objective
                );
                assert!(lp.is_feasible(&r.primal, FEAS_TOL), "case {case}");
            }
        }
    }
    // Both outcomes must be exercised for the comparison to mean anything.
    assert!(infeasible > 0 && infeasible < 200);
}

#[test]
fn milp_matches_binary_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let binaries = rng.gen_range(1..=12);
        let (lp, nb) = random_small_milp(&mut rng, binaries);
        let mut mip = MixedIntegerProgram::new(lp.clone());
        (0..nb).for_each(|j| mip.mark_integer(j));
        let r = solve_milp(&mip, &SolveLimits::default());
        match binary_enumeration(&lp, nb) {
            None => assert_eq!(r.status, SolveStatus::Infeasible, "case {case}"),
            Some(v) => {
                assert_eq!(r.status, SolveStatus::Optimal, "case {case}");
                assert!(
                    (r.objective - v).abs() <= 1e-9 * v.abs().max(1.0),
                    "case {case}: {} vs {v}",
                    r.objective
                );
                assert!(lp.is_feasible(&r.primal, FEAS_TOL));
            }
        }
    }
}

#[test]
fn duals_certify_standard_form_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.gen_range(2..12);
        let m = rng.gen_range(2..10);
        let mut lp = LinearProgram::new(Sense::Maximize);
        for _ in 0..n {
            lp.add_var(rng.gen_range(0.0..5.0), 0.0, f64::INFINITY);
        }
        for _ in 0..m {
            let coeffs = (0..n).map(|j| (j, rng.gen_range(0.1..3.0))).collect();
            lp.add_constraint(coeffs, Relation::Le, rng.gen_range(1.0..20.0));
        }
        let r = solve_lp(&lp, &SolveLimits::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        let y = &r.duals;
        assert!(y.iter().all(|&v| v >= -1e-9));
        for j in 0..n {
            let col: f64 = lp
                .constraints
                .iter()
                .zip(y)
                .map(|(c, yi)| c.coeffs.iter().find(|&&(k, _)| k == j).map_or(0.0, |&(_, a)| a * yi))
                .sum();
            assert!(col >= lp.objective[j] - 1e-7);
        }
        let dual_obj: f64 = lp.constraints.iter().zip(y).map(|(c, yi)| c.rhs * yi).sum();
        assert!((dual_obj - r.objective).abs() <= 1e-5);
    }
}

/// Grid search over per-entity allocations `(a, b)` with `a + b <= 1`,
/// used for two-resource max-min instances.
fn grid_max_min(throughput: &[[f64; 2]], caps: [f64; 2], step: f64) -> f64 {
    let ticks = (1.0 / step).round() as usize;
    let choices: Vec<(f64, f64)> = (0..=ticks)
        .flat_map(|a| (0..=ticks - a).map(move |b| (a as f64 * step, b as f64 * step)))
        .collect();
    fn rec(
        i: usize,
        t: &[[f64; 2]],
        choices: &[(f64, f64)],
        used: [f64; 2],
        caps: [f64; 2],
        cur_min: f64,
        best: &mut f64,
    ) {
        if cur_min <= *best {
            return;
        }
        if i == t.len() {
            *best = cur_min;
            return;
        }
        for &(a, b) in choices {
            if used[0] + a > caps[0] + 1e-12 || used[1] + b > caps[1] + 1e-12 {
                continue;
            }
            let v = t[i][0] * a + t[i][1] * b;
            rec(
                i + 1,
                t,
                choices,
                [used[0] + a, used[1] + b],
                caps,
                cur_min.min(v),
                best,
            );
        }
    }
    let mut best = f64::NEG_INFINITY;
    rec(0, throughput, &choices, [0.0, 0.0], caps, f64::INFINITY, &mut best);
    best
}

#[test]
fn max_min_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let jobs = rng.gen_range(2..=3);
        let t: Vec<[f64; 2]> = (0..jobs)
            .map(|_| [rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0)])
            .collect();
        let caps = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let mut base = LinearProgram::new(Sense::Maximize);
        let vars: Vec<[usize; 2]> = (0..jobs)
            .map(|_| [base.add_var(0.0, 0.0, 1.0), base.add_var(0.0, 0.0, 1.0)])
            .collect();
        for v in &vars {
            base.add_constraint(vec![(v[0], 1.0), (v[1], 1.0)], Relation::Le, 1.0);
        }
        for r in 0..2 {
            base.add_constraint(vars.iter().map(|v| (v[r], 1.0)).collect(), Relation::Le, caps[r]);
        }
        let terms = vars
            .iter()
            .zip(&t)
            .map(|(v, tt)| RatioTerm {
                coeffs: vec![(v[0], tt[0]), (v[1], tt[1])],
                normalizer: 1.0,
            })
            .collect();
        let r = solve_max_min(&MaxMinProblem { base, terms }, &SolveLimits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let step = 0.05;
        let grid = grid_max_min(&t, caps, step);
        // Rounding each allocation down to the grid stays feasible and costs
        // each entity at most step * sum of its throughputs.
        let resolution = t.iter().map(|tt| step * (tt[0] + tt[1])).fold(0.0, f64::max);
        assert!(grid <= r.objective + 1e-9, "grid {grid} above LP {}", r.objective);
        assert!(
            r.objective - grid <= resolution + 1e-9,
            "LP {} vs grid {grid}",
            r.objective
        );
    }
}

fn scaled_lp() -> impl Strategy<Value = (LinearProgram, f64)> {
    (any::<u64>(), 1u32..50).prop_map(|(seed, s)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..7);
        let mut lp = LinearProgram::new(Sense::Maximize);
        for _ in 0..n {
            lp.add_var(rng.gen_range(1..9) as f64, 0.0, f64::INFINITY);
        }
        for _ in 0..rng.gen_range(1..6) {
            let coeffs = (0..n).map(|j| (j, rng.gen_range(1..6) as f64)).collect();
            lp.add_constraint(coeffs, Relation::Le, rng.gen_range(3..30) as f64);
        }
        (lp, s as f64 / 4.0)
    })
}

proptest! {
    #[test]
    fn objective_scaling_scales_value_and_keeps_support((lp, scale) in scaled_lp()) {
        let base = solve_lp(&lp, &SolveLimits::default());
        let mut scaled = lp.clone();
        scaled.objective.iter_mut().for_each(|c| *c *= scale);
        let r = solve_lp(&scaled, &SolveLimits::default());
        prop_assert_eq!(base.status, SolveStatus::Optimal);
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        prop_assert!((r.objective - scale * base.objective).abs() <= 1e-7 * (1.0 + r.objective.abs()));
        let support = |x: &[f64]| x.iter().map(|v| v.abs() > 1e-9).collect::<Vec<_>>();
        prop_assert_eq!(support(&base.primal), support(&r.primal));
    }

    #[test]
    fn optimal_points_replay_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_small_lp(&mut rng);
        let r = solve_lp(&lp, &SolveLimits::default());
        if r.status == SolveStatus::Optimal {
            prop_assert!(lp.is_feasible(&r.primal, FEAS_TOL));
        }
    }
}
