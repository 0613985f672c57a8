use crate::program::{LinearProgram, ProgramError, Relation, Sense};
use crate::result::{SolveLimits, SolveResult};
use crate::simplex::solve_lp;

/// One entity's share of a max-min objective: `coeffs · x / normalizer`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTerm {
    pub coeffs: Vec<(usize, f64)>,
    pub normalizer: f64,
}

/// Maximise the minimum of several ratio terms over the feasible region of
/// `base` (whose own objective is ignored).
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinProblem {
    pub base: LinearProgram,
    pub terms: Vec<RatioTerm>,
}

impl MaxMinProblem {
    /// Epigraph form: one extra free variable `t` (the last column), one row
    /// `term_m(x) - t >= 0` per term, maximise `t`.
    pub fn epigraph(&self) -> Result<LinearProgram, ProgramError> {
        for (idx, term) in self.terms.iter().enumerate() {
            if !(term.normalizer > 0.0) || !term.normalizer.is_finite() {
                return Err(ProgramError::BadNormalizer(idx));
            }
        }
        let mut lp = self.base.clone();
        lp.sense = Sense::Maximize;
        lp.objective.iter_mut().for_each(|c| *c = 0.0);
        let t = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
        for term in &self.terms {
            let mut row: Vec<(usize, f64)> = term.coeffs.iter().map(|&(j, a)| (j, a / term.normalizer)).collect();
            row.push((t, -1.0));
            lp.add_constraint(row, Relation::Ge, 0.0);
        }
        lp.validate()?;
        Ok(lp)
    }

    /// Value of the smallest term at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeffs.iter().map(|&(j, a)| a * x[j]).sum::<f64>() / t.normalizer)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solves a max-min problem through its epigraph LP. The returned primal
/// covers only the base variables and the objective is the optimal minimum.
pub fn solve_max_min(problem: &MaxMinProblem, limits: &SolveLimits) -> Result<SolveResult, ProgramError> {
    let lp = problem.epigraph()?;
    let mut result = solve_lp(&lp, limits);
    if !result.primal.is_empty() {
        result.primal.truncate(problem.base.num_vars());
    }
    if !result.duals.is_empty() {
        result.duals.truncate(problem.base.num_constraints());
    }
    Ok(result)
}
