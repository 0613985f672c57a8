//! Bounded-variable primal revised simplex.
//!
//! Every row gets a slack so the system reads `A x + s = b`, and the initial
//! basis is the slack identity. Nonbasic variables sit at one of their bounds
//! (or at zero when free). Phase one minimises the sum of bound violations of
//! the basic variables and phase two optimises the real objective; the two are
//! re-entered as needed, so a numerically drifted basis simply falls back to
//! phase one after a refactorisation.
//!
//! The basis inverse is kept in product form: a file of eta columns over the
//! identity, rebuilt from scratch every [`REFACTOR_INTERVAL`] pivots.

use std::time::Instant;

use crate::program::{LinearProgram, Relation, Sense};
use crate::result::{SolveLimits, SolveResult, SolveStatus};
use crate::{FEAS_TOL, PIVOT_TOL};

const REFACTOR_INTERVAL: usize = 100;
const OPT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const PRICING_SEGMENTS: usize = 32;
const MIN_SEGMENT: usize = 1000;

/// Solves `lp` to optimality, or reports infeasibility / unboundedness.
pub fn solve_lp(lp: &LinearProgram, limits: &SolveLimits) -> SolveResult {
    if let Err(e) = lp.validate() {
        log::error!("rejecting malformed program: {e}");
        return SolveResult::without_point(SolveStatus::Infeasible, 0, Default::default());
    }
    solve_with_bounds(lp, &lp.bounds, limits)
}

/// Solves `lp` with its variable bounds replaced by `bounds`. The program is
/// assumed valid.
pub(crate) fn solve_with_bounds(lp: &LinearProgram, bounds: &[(f64, f64)], limits: &SolveLimits) -> SolveResult {
    solve_warm(lp, bounds, limits, None).0
}

/// Final basis of a solve, reusable as the starting point of a solve of the
/// same program under different bounds.
#[derive(Debug, Clone)]
pub(crate) struct Basis {
    basis: Vec<usize>,
    state: Vec<VarState>,
}

/// Like [`solve_with_bounds`] but optionally starting from `warm`, and
/// handing back the final basis when the solve was optimal.
pub(crate) fn solve_warm(
    lp: &LinearProgram,
    bounds: &[(f64, f64)],
    limits: &SolveLimits,
    warm: Option<&Basis>,
) -> (SolveResult, Option<Basis>) {
    let start = Instant::now();
    if bounds.iter().any(|&(l, h)| l > h) {
        return (
            SolveResult::without_point(SolveStatus::Infeasible, 0, start.elapsed()),
            None,
        );
    }
    let mut tableau = Tableau::new(lp, bounds);
    if let Some(warm) = warm {
        tableau.restore(warm);
    }
    let status = tableau.run(limits, start);
    let primal = tableau.x[..tableau.n].to_vec();
    let objective = lp.evaluate(&primal);
    log::trace!("simplex finished: {status:?} after {} iterations", tableau.iterations);
    let (status, duals) = match status {
        SolveStatus::Optimal => (status, tableau.duals()),
        SolveStatus::IterationLimit => (status, Vec::new()),
        other => {
            return (
                SolveResult::without_point(other, tableau.iterations, start.elapsed()),
                None,
            );
        }
    };
    let basis = (status == SolveStatus::Optimal).then(|| Basis {
        basis: tableau.basis.clone(),
        state: tableau.state.clone(),
    });
    let result = SolveResult {
        status,
        objective,
        primal,
        duals,
        bound: if status == SolveStatus::Optimal {
            objective
        } else {
            f64::NAN
        },
        iterations: tableau.iterations,
        nodes: 0,
        elapsed: start.elapsed(),
    };
    (result, basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

/// Product-form inverse: `B^-1 = F_k^-1 ... F_1^-1`.
struct Factor {
    etas: Vec<Eta>,
    pivots_since_refactor: usize,
}

impl Factor {
    fn ftran(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let vr = v[eta.pos];
            if vr == 0.0 {
                continue;
            }
            let vr = vr / eta.pivot;
            v[eta.pos] = vr;
            for &(i, a) in &eta.entries {
                v[i] -= a * vr;
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = y[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * y[i];
            }
            y[eta.pos] = s / eta.pivot;
        }
    }

    fn push(&mut self, pos: usize, column: &[f64]) {
        let entries = column
            .iter()
            .enumerate()
            .filter(|&(i, a)| i != pos && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: column[pos],
            entries,
        });
    }
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    /// Internal minimisation costs over structurals then slacks.
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    factor: Factor,
    rhs: Vec<f64>,
    iterations: u64,
    price_cursor: usize,
}

enum Entering {
    Var { var: usize, dir: f64, reduced: f64 },
    None,
}

enum Step {
    Pivot { pos: usize, theta: f64, to_upper: bool },
    Flip { theta: f64 },
    Unbounded,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram, bounds: &[(f64, f64)]) -> Self {
        let m = lp.num_constraints();
        let n = lp.num_vars();

        let mut counts = vec![0usize; n];
        for c in &lp.constraints {
            for &(j, _) in &c.coeffs {
                counts[j] += 1;
            }
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let nnz = col_start[n];
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0.0; nnz];
        let mut fill = col_start.clone();
        for (i, c) in lp.constraints.iter().enumerate() {
            for &(j, a) in &c.coeffs {
                if a != 0.0 {
                    col_rows[fill[j]] = i;
                    col_vals[fill[j]] = a;
                    fill[j] += 1;
                }
            }
        }
        // Explicit zeros were skipped; compact each column.
        let mut compact_start = vec![0usize; n + 1];
        let mut write = 0;
        for j in 0..n {
            compact_start[j] = write;
            for k in col_start[j]..fill[j] {
                col_rows[write] = col_rows[k];
                col_vals[write] = col_vals[k];
                write += 1;
            }
        }
        compact_start[n] = write;
        col_rows.truncate(write);
        col_vals.truncate(write);

        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
        cost.resize(n + m, 0.0);

        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        let mut x = Vec::with_capacity(n + m);
        let mut state = Vec::with_capacity(n + m);
        for &(l, h) in bounds {
            lo.push(l);
            hi.push(h);
            if l.is_finite() {
                x.push(l);
                state.push(VarState::AtLower);
            } else if h.is_finite() {
                x.push(h);
                state.push(VarState::AtUpper);
            } else {
                x.push(0.0);
                state.push(VarState::Free);
            }
        }
        for c in &lp.constraints {
            let (l, h) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
            x.push(0.0);
            state.push(VarState::Basic);
        }

        let mut tableau = Tableau {
            lp,
            m,
            n,
            col_start: compact_start,
            col_rows,
            col_vals,
            cost,
            lo,
            hi,
            x,
            state,
            basis: (n..n + m).collect(),
            factor: Factor {
                etas: Vec::new(),
                pivots_since_refactor: 0,
            },
            rhs: lp.constraints.iter().map(|c| c.rhs).collect(),
            iterations: 0,
            price_cursor: 0,
        };
        tableau.recompute_basics();
        tableau
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_start[j], self.col_start[j + 1]);
        (&self.col_rows[s..e], &self.col_vals[s..e])
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let (rows, vals) = self.column(j);
            rows.iter().zip(vals).map(|(&i, &a)| a * y[i]).sum()
        } else {
            y[j - self.n]
        }
    }

    fn scatter_column(&self, j: usize, v: &mut [f64]) {
        v.iter_mut().for_each(|e| *e = 0.0);
        if j < self.n {
            let (rows, vals) = self.column(j);
            for (&i, &a) in rows.iter().zip(vals) {
                v[i] = a;
            }
        } else {
            v[j - self.n] = 1.0;
        }
    }

    fn recompute_basics(&mut self) {
        let mut r = self.rhs.clone();
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                let (s, e) = (self.col_start[j], self.col_start[j + 1]);
                for k in s..e {
                    r[self.col_rows[k]] -= self.col_vals[k] * xj;
                }
            } else {
                r[j - self.n] -= xj;
            }
        }
        self.factor.ftran(&mut r);
        for (pos, &var) in self.basis.iter().enumerate() {
            self.x[var] = r[pos];
        }
    }

    /// Adopts a basis from an earlier solve. Nonbasic variables go to the
    /// side they sat on if that bound still exists; the basic values are
    /// then whatever the new bounds imply, feasible or not.
    fn restore(&mut self, warm: &Basis) {
        if warm.basis.len() != self.m || warm.state.len() != self.n + self.m {
            return;
        }
        for j in 0..self.n + self.m {
            match warm.state[j] {
                VarState::Basic => self.state[j] = VarState::Basic,
                VarState::AtUpper if self.hi[j].is_finite() => {
                    self.state[j] = VarState::AtUpper;
                    self.x[j] = self.hi[j];
                }
                _ => self.park_nonbasic(j),
            }
        }
        self.basis = warm.basis.clone();
        self.refactor();
    }

    fn park_nonbasic(&mut self, j: usize) {
        let (l, h) = (self.lo[j], self.hi[j]);
        if l.is_finite() {
            self.x[j] = l;
            self.state[j] = VarState::AtLower;
        } else if h.is_finite() {
            self.x[j] = h;
            self.state[j] = VarState::AtUpper;
        } else {
            self.x[j] = 0.0;
            self.state[j] = VarState::Free;
        }
    }

    /// Rebuilds the eta file from the current basic set. Structural columns
    /// that turn out dependent are swapped for the slack of an uncovered row.
    fn refactor(&mut self) {
        let m = self.m;
        let mut new_basis = vec![usize::MAX; m];
        let mut structurals = Vec::new();
        for &var in &self.basis {
            if var >= self.n {
                new_basis[var - self.n] = var;
            } else {
                structurals.push(var);
            }
        }
        structurals.sort_by_key(|&j| (self.col_start[j + 1] - self.col_start[j], j));
        let mut open: Vec<bool> = new_basis.iter().map(|&b| b == usize::MAX).collect();
        self.factor = Factor {
            etas: Vec::new(),
            pivots_since_refactor: 0,
        };

        // Columns are sparse and so is most of their transformed image, so
        // the work vector is tracked by its nonzero pattern.
        let mut v = vec![0.0; m];
        let mut touched = vec![false; m];
        let mut pattern = Vec::new();
        for j in structurals {
            let (rows, vals) = self.column(j);
            for (&i, &a) in rows.iter().zip(vals) {
                v[i] = a;
                touched[i] = true;
                pattern.push(i);
            }
            for eta in &self.factor.etas {
                let vr = v[eta.pos];
                if vr == 0.0 {
                    continue;
                }
                let vr = vr / eta.pivot;
                v[eta.pos] = vr;
                for &(i, a) in &eta.entries {
                    if !touched[i] {
                        touched[i] = true;
                        pattern.push(i);
                    }
                    v[i] -= a * vr;
                }
            }
            let mut best = None;
            let mut best_abs = 0.0;
            for &i in &pattern {
                if open[i] && v[i].abs() > best_abs {
                    best_abs = v[i].abs();
                    best = Some(i);
                }
            }
            match best {
                Some(r) if best_abs > PIVOT_TOL => {
                    let entries = pattern
                        .iter()
                        .filter(|&&i| i != r && v[i].abs() > DROP_TOL)
                        .map(|&i| (i, v[i]))
                        .collect();
                    self.factor.etas.push(Eta {
                        pos: r,
                        pivot: v[r],
                        entries,
                    });
                    open[r] = false;
                    new_basis[r] = j;
                }
                _ => {
                    log::debug!("dropping dependent column {j} from basis");
                    self.park_nonbasic(j);
                }
            }
            for &i in &pattern {
                v[i] = 0.0;
                touched[i] = false;
            }
            pattern.clear();
        }
        for r in 0..m {
            if open[r] {
                new_basis[r] = self.n + r;
                self.state[self.n + r] = VarState::Basic;
            }
        }
        self.basis = new_basis;
        self.recompute_basics();
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.hi[j] - self.lo[j] <= 0.0
    }

    /// Fills `cb` with the phase-appropriate basic costs and returns whether
    /// the basis is primal infeasible.
    fn basic_costs(&self, cb: &mut [f64]) -> bool {
        let mut infeasible = false;
        for (pos, &var) in self.basis.iter().enumerate() {
            let v = self.x[var];
            cb[pos] = if v < self.lo[var] - FEAS_TOL {
                infeasible = true;
                -1.0
            } else if v > self.hi[var] + FEAS_TOL {
                infeasible = true;
                1.0
            } else {
                0.0
            };
        }
        if !infeasible {
            for (pos, &var) in self.basis.iter().enumerate() {
                cb[pos] = self.cost[var];
            }
        }
        infeasible
    }

    /// Reduced cost of nonbasic `j` and its improving direction, if any.
    fn candidate(&self, j: usize, y: &[f64], phase_one: bool) -> Option<(f64, f64)> {
        let st = self.state[j];
        if st == VarState::Basic || self.is_fixed(j) {
            return None;
        }
        let c = if phase_one { 0.0 } else { self.cost[j] };
        let d = c - self.dot_column(j, y);
        let dir = match st {
            VarState::AtLower if d < -OPT_TOL => 1.0,
            VarState::AtUpper if d > OPT_TOL => -1.0,
            VarState::Free if d.abs() > OPT_TOL => -d.signum(),
            _ => return None,
        };
        Some((d, dir))
    }

    /// Bland: the lowest improving index. Otherwise partial Dantzig pricing:
    /// segments are scanned round-robin from where the last search stopped
    /// and the best candidate of the first segment that has one wins.
    fn price(&mut self, y: &[f64], phase_one: bool, bland: bool) -> Entering {
        let total = self.n + self.m;
        if bland {
            return (0..total)
                .find_map(|j| {
                    self.candidate(j, y, phase_one).map(|(d, dir)| Entering::Var {
                        var: j,
                        dir,
                        reduced: d,
                    })
                })
                .unwrap_or(Entering::None);
        }
        let segment = (total / PRICING_SEGMENTS).max(MIN_SEGMENT).min(total);
        let mut chosen = Entering::None;
        let mut best = 0.0;
        let mut scanned = 0;
        while scanned < total {
            let len = segment.min(total - scanned);
            for step in 0..len {
                let j = (self.price_cursor + step) % total;
                if let Some((d, dir)) = self.candidate(j, y, phase_one) {
                    if d.abs() > best {
                        best = d.abs();
                        chosen = Entering::Var {
                            var: j,
                            dir,
                            reduced: d,
                        };
                    }
                }
            }
            self.price_cursor = (self.price_cursor + len) % total;
            scanned += len;
            if best > 0.0 {
                break;
            }
        }
        chosen
    }

    /// Step length to the bound a basic variable would hit, given its rate of
    /// change `delta` per unit step, or `None` when it never blocks.
    fn blocking_distance(&self, var: usize, delta: f64, phase_one: bool) -> Option<(f64, bool)> {
        let v = self.x[var];
        let (lo, hi) = (self.lo[var], self.hi[var]);
        if delta < 0.0 {
            if phase_one && v > hi + FEAS_TOL {
                // Currently above its upper bound; it turns feasible at hi.
                return Some((v - hi, true));
            }
            if phase_one && v < lo - FEAS_TOL {
                return None;
            }
            lo.is_finite().then(|| ((v - lo).max(0.0), false))
        } else {
            if phase_one && v < lo - FEAS_TOL {
                return Some((lo - v, false));
            }
            if phase_one && v > hi + FEAS_TOL {
                return None;
            }
            hi.is_finite().then(|| ((hi - v).max(0.0), true))
        }
    }

    fn ratio_test(&self, alpha: &[f64], q: usize, dir: f64, phase_one: bool, bland: bool) -> Step {
        let mut step = None::<(usize, f64, bool)>;
        if bland {
            let mut best_ratio = f64::INFINITY;
            for (pos, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -dir * a;
                let var = self.basis[pos];
                if let Some((dist, to_upper)) = self.blocking_distance(var, delta, phase_one) {
                    let ratio = dist / delta.abs();
                    let better = match step {
                        None => true,
                        Some((p, _, _)) => {
                            ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && var < self.basis[p])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        step = Some((pos, ratio, to_upper));
                    }
                }
            }
        } else {
            // Harris two-pass: relax bounds by the feasibility tolerance to
            // find the step cap, then pick the largest pivot within it.
            let mut cap = f64::INFINITY;
            for (pos, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -dir * a;
                if let Some((dist, _)) = self.blocking_distance(self.basis[pos], delta, phase_one) {
                    cap = cap.min((dist + FEAS_TOL) / delta.abs());
                }
            }
            if cap.is_finite() {
                let mut best_pivot = 0.0;
                for (pos, &a) in alpha.iter().enumerate() {
                    if a.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let delta = -dir * a;
                    if let Some((dist, to_upper)) = self.blocking_distance(self.basis[pos], delta, phase_one) {
                        let ratio = dist / delta.abs();
                        if ratio <= cap && a.abs() > best_pivot {
                            best_pivot = a.abs();
                            step = Some((pos, ratio, to_upper));
                        }
                    }
                }
            }
        }

        let range = self.hi[q] - self.lo[q];
        match step {
            Some((_, theta, _)) if range.is_finite() && range <= theta => Step::Flip { theta: range },
            Some((pos, theta, to_upper)) => Step::Pivot { pos, theta, to_upper },
            None if range.is_finite() => Step::Flip { theta: range },
            None => Step::Unbounded,
        }
    }

    fn run(&mut self, limits: &SolveLimits, start: Instant) -> SolveStatus {
        let m = self.m;
        let mut cb = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut degenerate_run = 0usize;
        let bland_after = 3 * m.max(1);
        let mut verified = false;

        loop {
            if self.iterations >= limits.max_iterations {
                return SolveStatus::IterationLimit;
            }
            if self.iterations % 64 == 0 {
                if let Some(limit) = limits.time_limit {
                    if start.elapsed() > limit {
                        return SolveStatus::IterationLimit;
                    }
                }
            }

            let phase_one = self.basic_costs(&mut cb);
            y.copy_from_slice(&cb);
            self.factor.btran(&mut y);
            let bland = degenerate_run >= bland_after;

            let (q, dir, reduced) = match self.price(&y, phase_one, bland) {
                Entering::Var { var, dir, reduced } => (var, dir, reduced),
                Entering::None => {
                    // Confirm on a fresh factorisation before trusting the verdict.
                    if !verified {
                        self.refactor();
                        verified = true;
                        continue;
                    }
                    return if phase_one {
                        SolveStatus::Infeasible
                    } else {
                        SolveStatus::Optimal
                    };
                }
            };
            verified = false;

            self.scatter_column(q, &mut alpha);
            self.factor.ftran(&mut alpha);

            let step = self.ratio_test(&alpha, q, dir, phase_one, bland);
            self.iterations += 1;
            let theta = match step {
                Step::Unbounded => {
                    if phase_one {
                        // Cannot happen in exact arithmetic; rebuild and retry.
                        self.refactor();
                        continue;
                    }
                    return SolveStatus::Unbounded;
                }
                Step::Flip { theta } | Step::Pivot { theta, .. } => theta,
            };

            if theta * reduced.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            if theta != 0.0 {
                self.x[q] += dir * theta;
                for (pos, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        let var = self.basis[pos];
                        self.x[var] -= dir * theta * a;
                    }
                }
            }

            match step {
                Step::Flip { .. } => {
                    self.state[q] = if dir > 0.0 {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Step::Pivot { pos, to_upper, .. } => {
                    let leaving = self.basis[pos];
                    if to_upper {
                        self.x[leaving] = self.hi[leaving];
                        self.state[leaving] = VarState::AtUpper;
                    } else {
                        self.x[leaving] = self.lo[leaving];
                        self.state[leaving] = VarState::AtLower;
                    }
                    self.basis[pos] = q;
                    self.state[q] = VarState::Basic;
                    self.factor.push(pos, &alpha);
                    self.factor.pivots_since_refactor += 1;
                    if self.factor.pivots_since_refactor >= REFACTOR_INTERVAL {
                        self.refactor();
                    }
                }
                Step::Unbounded => unreachable!(),
            }
        }
    }

    /// Row duals in the caller's objective sense.
    fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        self.factor.btran(&mut y);
        if self.lp.sense == Sense::Maximize {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        y
    }
}
