//! Text export of the metric-repair LP so results can be cross-checked
//! against external solvers.
//!
//! The grammar is the common LP file format: a `Minimize` section with a
//! single objective row, `Subject To` with one named `<=` row per
//! constraint, a `Bounds` section listing only the mode fixings (all other
//! variables keep the format's default `>= 0`), and `End`. Components are
//! named `p_i_j_pos` / `p_i_j_neg` with 1-indexed `i < j`.

use std::io::{self, Write};

use super::{LpInstance, PairLayout};

fn var_name(lp: &LpInstance, col: usize) -> String {
    match lp.layout {
        Some(PairLayout { n, .. }) => {
            let q = col / 2;
            let (i, j) = super::pair_from_index(q, n);
            let part = if col.is_multiple_of(2) { "pos" } else { "neg" };
            format!("p_{}_{}_{}", i + 1, j + 1, part)
        }
        None => format!("x{col}"),
    }
}

fn push_term(out: &mut String, first: bool, coef: f64, name: &str) {
    if first {
        if coef == 1.0 {
            out.push_str(name);
        } else if coef == -1.0 {
            out.push_str("- ");
            out.push_str(name);
        } else {
            out.push_str(&format!("{coef} {name}"));
        }
    } else if coef == 1.0 {
        out.push_str(&format!(" + {name}"));
    } else if coef == -1.0 {
        out.push_str(&format!(" - {name}"));
    } else if coef < 0.0 {
        out.push_str(&format!(" - {} {name}", -coef));
    } else {
        out.push_str(&format!(" + {coef} {name}"));
    }
}

/// Write an instance in LP text format.
pub fn write_lp<W: Write>(lp: &LpInstance, w: &mut W) -> io::Result<()> {
    if let Some(PairLayout { n, mode }) = lp.layout {
        writeln!(w, "\\ metric repair l1 LP: n={}, mode={}", n, mode.name())?;
    }
    writeln!(w, "Minimize")?;
    let mut obj = String::from(" obj:");
    let mut first = true;
    for (col, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 && !lp.fixed_zero[col] {
            if first {
                obj.push(' ');
            }
            push_term(&mut obj, first, c, &var_name(lp, col));
            first = false;
        }
    }
    if first {
        obj.push_str(" 0 ");
        obj.push_str(&var_name(lp, 0));
    }
    writeln!(w, "{obj}")?;
    writeln!(w, "Subject To")?;
    for c in &lp.constraints {
        let mut line = format!(" {}:", c.name);
        let mut first = true;
        for &(col, coef) in &c.coeffs {
            if lp.fixed_zero[col] {
                continue;
            }
            if first {
                line.push(' ');
            }
            push_term(&mut line, first, coef, &var_name(lp, col));
            first = false;
        }
        if first {
            // every term was fixed to zero; keep the row syntactically valid
            line.push_str(&format!(" 0 {}", var_name(lp, 0)));
        }
        line.push_str(&format!(" <= {}", c.rhs));
        writeln!(w, "{line}")?;
    }
    let fixings: Vec<usize> = (0..lp.num_vars).filter(|&j| lp.fixed_zero[j]).collect();
    if !fixings.is_empty() {
        writeln!(w, "Bounds")?;
        for j in fixings {
            writeln!(w, " {} = 0", var_name(lp, j))?;
        }
    }
    writeln!(w, "End")?;
    Ok(())
}
