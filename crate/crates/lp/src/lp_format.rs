//! Writer for the CPLEX-style LP text format, for cross-checking programs
//! against external solvers.

use std::fmt::Write as _;

use crate::program::{LinearProgram, MixedIntegerProgram, Relation, Sense};

pub fn write_lp(lp: &LinearProgram) -> String {
    render(lp, &[])
}

pub fn write_milp(mip: &MixedIntegerProgram) -> String {
    let ints: Vec<usize> = mip.integers.iter().copied().collect();
    render(&mip.lp, &ints)
}

fn term(out: &mut String, first: bool, coeff: f64, var: usize) {
    if first {
        let _ = write!(out, " {coeff} x{var}");
    } else if coeff < 0.0 {
        let _ = write!(out, " - {} x{var}", -coeff);
    } else {
        let _ = write!(out, " + {coeff} x{var}");
    }
}

fn render(lp: &LinearProgram, integers: &[usize]) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, j);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        let _ = write!(out, " c{i}:");
        if c.coeffs.is_empty() {
            out.push_str(" 0 x0");
        }
        for (k, &(j, a)) in c.coeffs.iter().enumerate() {
            term(&mut out, k == 0, a, j);
        }
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let _ = writeln!(out, " {rel} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " x{j} free");
            }
            (true, true) if lo == hi => {
                let _ = writeln!(out, " x{j} = {lo}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
            }
            (true, false) => {
                let _ = writeln!(out, " x{j} >= {lo}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= x{j} <= {hi}");
            }
        }
    }
    if !integers.is_empty() {
        out.push_str("General\n");
        for j in integers {
            let _ = writeln!(out, " x{j}");
        }
    }
    out.push_str("End\n");
    out
}
