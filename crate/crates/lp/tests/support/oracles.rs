//! Brute-force reference solvers. They share no code with the simplex or
//! branch-and-bound paths they check.

#![allow(dead_code)]

use pop_lp::{LinearProgram, Relation, Sense};
use rand::Rng;

/// Outcome of an exhaustive search: `None` means no feasible point exists.
pub type OracleValue = Option<f64>;

/// Solves the square system `m x = rhs` with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Optimum of a bounded LP by enumerating every intersection of `n` tight
/// hyperplanes (rows and finite variable bounds). Valid only when the
/// feasible region is a polytope with at least one vertex.
pub fn vertex_enumeration(lp: &LinearProgram) -> OracleValue {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] += v;
        }
        planes.push((a, c.rhs));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        for b in [lo, hi] {
            if b.is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                planes.push((a, b));
            }
        }
    }
    let scale = 1.0 + lp.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let mut best: OracleValue = None;
    for_each_subset(planes.len(), n, &mut |idx| {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(m, rhs) {
            if lp.max_violation(&x) <= 1e-9 * scale {
                let v = lp.evaluate(&x);
                best = Some(match (best, lp.sense) {
                    (None, _) => v,
                    (Some(b), Sense::Maximize) => b.max(v),
                    (Some(b), Sense::Minimize) => b.min(v),
                });
            }
        }
    });
    best
}

/// Optimum of a program whose first `binaries` variables are 0/1, found by
/// trying every assignment and handing the continuous rest to
/// [`vertex_enumeration`].
pub fn binary_enumeration(lp: &LinearProgram, binaries: usize) -> OracleValue {
    let n = lp.num_vars();
    let cont = n - binaries;
    let mut best: OracleValue = None;
    for mask in 0u32..(1u32 << binaries) {
        let fixed: Vec<f64> = (0..binaries).map(|b| ((mask >> b) & 1) as f64).collect();
        let value = if cont == 0 {
            lp.is_feasible(&fixed, 1e-9).then(|| lp.evaluate(&fixed))
        } else {
            let mut sub = LinearProgram::new(lp.sense);
            for j in binaries..n {
                sub.add_var(lp.objective[j], lp.bounds[j].0, lp.bounds[j].1);
            }
            for c in &lp.constraints {
                let mut rhs = c.rhs;
                let mut coeffs = Vec::new();
                for &(j, a) in &c.coeffs {
                    if j < binaries {
                        rhs -= a * fixed[j];
                    } else {
                        coeffs.push((j - binaries, a));
                    }
                }
                sub.add_constraint(coeffs, c.relation, rhs);
            }
            let fixed_part: f64 = (0..binaries).map(|j| lp.objective[j] * fixed[j]).sum();
            vertex_enumeration(&sub).map(|v| v + fixed_part)
        };
        if let Some(v) = value {
            best = Some(match (best, lp.sense) {
                (None, _) => v,
                (Some(b), Sense::Maximize) => b.max(v),
                (Some(b), Sense::Minimize) => b.min(v),
            });
        }
    }
    best
}

/// Random bounded LP with at most 8 variables and 8 rows. Nonnegative
/// variables plus a budget row keep the region bounded.
pub fn random_small_lp(rng: &mut impl Rng) -> LinearProgram {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LinearProgram::new(sense);
    for _ in 0..n {
        let hi = if rng.gen_bool(0.2) {
            rng.gen_range(1..6) as f64
        } else {
            f64::INFINITY
        };
        lp.add_var(rng.gen_range(-5..=5) as f64, 0.0, hi);
    }
    lp.add_constraint(
        (0..n).map(|j| (j, 1.0)).collect(),
        Relation::Le,
        rng.gen_range(5..15) as f64,
    );
    for _ in 1..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-4..=6) as f64));
            }
        }
        let relation = match rng.gen_range(0..10) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs = rng.gen_range(-3..=12) as f64;
        lp.add_constraint(coeffs, relation, rhs);
    }
    lp
}

/// Random program with `binaries` leading 0/1 variables and up to two
/// bounded continuous ones.
pub fn random_small_milp(rng: &mut impl Rng, binaries: usize) -> (LinearProgram, usize) {
    let cont = rng.gen_range(0..=2);
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LinearProgram::new(sense);
    for _ in 0..binaries {
        lp.add_var(rng.gen_range(-6..=9) as f64, 0.0, 1.0);
    }
    for _ in 0..cont {
        lp.add_var(rng.gen_range(-3..=4) as f64 * 0.5, 0.0, rng.gen_range(1..5) as f64);
    }
    let n = binaries + cont;
    for _ in 0..rng.gen_range(1..=5) {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                coeffs.push((j, rng.gen_range(-3..=7) as f64));
            }
        }
        let relation = if rng.gen_bool(0.2) { Relation::Ge } else { Relation::Le };
        let rhs = match relation {
            Relation::Ge => rng.gen_range(0..=4) as f64,
            _ => rng.gen_range(2..=15) as f64,
        };
        lp.add_constraint(coeffs, relation, rhs);
    }
    (lp, binaries)
}
