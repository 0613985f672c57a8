//! Best-first branch-and-bound over LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::program::{MixedIntegerProgram, Sense};
use crate::result::{SolveLimits, SolveResult, SolveStatus};
use crate::simplex::{solve_warm, Basis};
use crate::INT_TOL;

/// How often (in explored nodes) the rounding heuristic is retried.
const ROUNDING_PERIOD: u64 = 25;

struct Node {
    /// Relaxation objective in minimisation form.
    key: f64,
    depth: usize,
    seq: u64,
    bounds: Vec<(f64, f64)>,
    primal: Vec<f64>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest key first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    mip: &'a MixedIntegerProgram,
    limits: &'a SolveLimits,
    sign: f64,
    incumbent: Option<(f64, Vec<f64>)>,
    iterations: u64,
    lp_trouble: bool,
}

enum Relaxed {
    Infeasible,
    Unbounded,
    Solved {
        key: f64,
        primal: Vec<f64>,
        basis: Option<Basis>,
    },
}

impl Search<'_> {
    fn relax(&mut self, bounds: &[(f64, f64)], warm: Option<&Basis>) -> Relaxed {
        let (r, basis) = solve_warm(&self.mip.lp, bounds, self.limits, warm);
        self.iterations += r.iterations;
        match r.status {
            SolveStatus::Optimal => Relaxed::Solved {
                key: self.sign * r.objective,
                primal: r.primal,
                basis,
            },
            SolveStatus::Unbounded => Relaxed::Unbounded,
            SolveStatus::Infeasible => Relaxed::Infeasible,
            _ => {
                self.lp_trouble = true;
                Relaxed::Infeasible
            }
        }
    }

    fn gap_allows(&self, key: f64) -> bool {
        match &self.incumbent {
            None => true,
            Some((best, _)) => key < best - self.limits.gap * key.abs() - 1e-9,
        }
    }

    /// Branching variable: the fractional integer with the largest distance
    /// to an integer, weighted by its objective coefficient so expensive
    /// decisions are settled first.
    fn most_fractional(&self, primal: &[f64]) -> Option<usize> {
        let mut pick = None;
        let mut best = 0.0;
        for &j in &self.mip.integers {
            let frac = primal[j] - primal[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= INT_TOL {
                continue;
            }
            let score = dist * (1.0 + self.mip.lp.objective[j].abs());
            if score > best {
                best = score;
                pick = Some(j);
            }
        }
        pick
    }

    fn offer(&mut self, key: f64, primal: &[f64]) {
        if self.incumbent.as_ref().map_or(true, |(best, _)| key < *best) {
            let mut x = primal.to_vec();
            for &j in &self.mip.integers {
                x[j] = x[j].round();
            }
            log::debug!("new incumbent {}", self.sign * key);
            self.incumbent = Some((key, x));
        }
    }

    /// Fixes every integer variable to a rounded value and re-solves the
    /// continuous remainder.
    fn try_rounding(&mut self, bounds: &[(f64, f64)], primal: &[f64], warm: Option<&Basis>) {
        let ceil = |v: f64| (v - INT_TOL).ceil();
        for round in [ceil, f64::round] {
            let mut fixed = bounds.to_vec();
            for &j in &self.mip.integers {
                let (lo, hi) = bounds[j];
                let v = round(primal[j]).clamp(lo, hi);
                fixed[j] = (v, v);
            }
            if let Relaxed::Solved { key, primal, .. } = self.relax(&fixed, warm) {
                self.offer(key, &primal);
            }
        }
    }
}

pub fn solve_milp(mip: &MixedIntegerProgram, limits: &SolveLimits) -> SolveResult {
    let start = Instant::now();
    if let Err(e) = mip.validate() {
        log::error!("rejecting malformed program: {e}");
        return SolveResult::without_point(SolveStatus::Infeasible, 0, start.elapsed());
    }
    let sign = match mip.lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut search = Search {
        mip,
        limits,
        sign,
        incumbent: None,
        iterations: 0,
        lp_trouble: false,
    };

    let mut root_bounds = mip.lp.bounds.clone();
    for &j in &mip.integers {
        let (lo, hi) = root_bounds[j];
        root_bounds[j] = ((lo - INT_TOL).ceil(), (hi + INT_TOL).floor());
    }

    let finish = |search: Search, status: SolveStatus, bound: f64, nodes: u64| {
        let (objective, primal) = match search.incumbent {
            Some((key, x)) => (sign * key, x),
            None => (f64::NAN, Vec::new()),
        };
        SolveResult {
            status,
            objective,
            primal,
            duals: Vec::new(),
            bound: sign * bound,
            iterations: search.iterations,
            nodes,
            elapsed: start.elapsed(),
        }
    };

    let (key, primal, basis) = match search.relax(&root_bounds, None) {
        Relaxed::Infeasible => {
            let status = if search.lp_trouble {
                SolveStatus::IterationLimit
            } else {
                SolveStatus::Infeasible
            };
            return SolveResult::without_point(status, search.iterations, start.elapsed());
        }
        Relaxed::Unbounded => {
            return SolveResult::without_point(SolveStatus::Unbounded, search.iterations, start.elapsed())
        }
        Relaxed::Solved { key, primal, basis } => (key, primal, basis),
    };
    if search.most_fractional(&primal).is_none() {
        search.offer(key, &primal);
        return finish(search, SolveStatus::Optimal, key, 0);
    }
    search.try_rounding(&root_bounds, &primal, basis.as_ref());

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        key,
        depth: 0,
        seq,
        bounds: root_bounds,
        primal,
        basis,
    });
    let mut nodes = 0u64;

    // Until an incumbent exists, plunge into the better child instead of
    // returning to the heap: best-first alone can wander without ever
    // reaching a leaf.
    let mut plunge: Option<Node> = None;
    while let Some(node) = plunge.take().or_else(|| heap.pop()) {
        if !search.gap_allows(node.key) {
            // Best-first: every remaining node is at least as bad.
            heap.clear();
            break;
        }
        if nodes >= limits.max_nodes || limits.time_limit.is_some_and(|t| start.elapsed() > t) {
            let bound = heap.peek().map_or(node.key, |n| n.key.min(node.key));
            return finish(search, SolveStatus::GapLimit, bound, nodes);
        }
        nodes += 1;
        if nodes % ROUNDING_PERIOD == 0 {
            search.try_rounding(&node.bounds, &node.primal, node.basis.as_ref());
        }

        let Some(var) = search.most_fractional(&node.primal) else {
            search.offer(node.key, &node.primal);
            continue;
        };
        let value = node.primal[var];
        let mut children = Vec::with_capacity(2);
        for (lo, hi) in [(node.bounds[var].0, value.floor()), (value.ceil(), node.bounds[var].1)] {
            if lo > hi {
                continue;
            }
            let mut bounds = node.bounds.clone();
            bounds[var] = (lo, hi);
            match search.relax(&bounds, node.basis.as_ref()) {
                Relaxed::Infeasible | Relaxed::Unbounded => {}
                Relaxed::Solved { key, primal, basis } => {
                    if !search.gap_allows(key) {
                        continue;
                    }
                    if search.most_fractional(&primal).is_none() {
                        search.offer(key, &primal);
                    } else {
                        seq += 1;
                        children.push(Node {
                            key,
                            depth: node.depth + 1,
                            seq,
                            bounds,
                            primal,
                            basis,
                        });
                    }
                }
            }
        }
        if search.incumbent.is_none() {
            children.sort_by(|a, b| b.key.total_cmp(&a.key));
            plunge = children.pop();
        }
        heap.extend(children);
    }

    match search.incumbent {
        Some((best, _)) => {
            let status = if search.lp_trouble {
                SolveStatus::GapLimit
            } else {
                SolveStatus::Optimal
            };
            finish(search, status, best, nodes)
        }
        None => {
            let status = if search.lp_trouble {
                SolveStatus::GapLimit
            } else {
                SolveStatus::Infeasible
            };
            let mut r = finish(search, status, f64::NAN, nodes);
            r.bound = f64::NAN;
            r
        }
    }
}
