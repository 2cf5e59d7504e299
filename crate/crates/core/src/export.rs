//! Free-format MPS and CPLEX-style LP writers. Row names are constraint
//! tags (`family_entity_hour`) and column names are variable names, so an
//! exported file can be matched back to the model row by row.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{MilpModel, Sense, Variable};

const OBJECTIVE_ROW: &str = "obj";

/// Free-format MPS text for `model`.
pub fn write_mps(model: &MilpModel, name: &str) -> String {
    let mut out = String::new();
    let names: Vec<String> = model.variables().iter().map(|v| v.reference.name()).collect();
    let _ = writeln!(out, "NAME {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for c in model.constraints() {
        let code = match c.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
            Sense::Ge => 'G',
        };
        let _ = writeln!(out, " {code}  {}", c.tag);
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.var_count()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(j, a) in &c.terms {
            if a != 0.0 {
                columns[j].push((i, a));
            }
        }
    }
    let rows = model.constraints();
    out.push_str("COLUMNS\n");
    let mut in_integer_block = false;
    let mut marker = 0;
    for (j, var) in model.variables().iter().enumerate() {
        if var.integer != in_integer_block {
            let kind = if var.integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER{marker} 'MARKER' '{kind}'");
            marker += 1;
            in_integer_block = var.integer;
        }
        let cost = model.objective()[j];
        let mut wrote = false;
        if cost != 0.0 {
            let _ = writeln!(out, "    {} {OBJECTIVE_ROW} {}", names[j], cost);
            wrote = true;
        }
        for &(i, a) in &columns[j] {
            let _ = writeln!(out, "    {} {} {}", names[j], rows[i].tag, a);
            wrote = true;
        }
        if !wrote {
            // Keep columns that appear nowhere.
            let _ = writeln!(out, "    {} {OBJECTIVE_ROW} 0", names[j]);
        }
    }
    if in_integer_block {
        let _ = writeln!(out, "    MARKER{marker} 'MARKER' 'INTEND'");
    }

    out.push_str("RHS\n");
    for c in rows.iter().filter(|c| c.rhs != 0.0) {
        let _ = writeln!(out, "    RHS {} {}", c.tag, c.rhs);
    }

    out.push_str("BOUNDS\n");
    for (var, name) in model.variables().iter().zip(&names) {
        write_mps_bounds(&mut out, var, name);
    }
    out.push_str("ENDATA\n");
    out
}

fn write_mps_bounds(out: &mut String, var: &Variable, name: &str) {
    let (lo, up) = (var.lower, var.upper);
    if var.integer && lo == 0.0 && up == 1.0 {
        let _ = writeln!(out, " BV BND {name}");
        return;
    }
    if lo == up {
        let _ = writeln!(out, " FX BND {name} {lo}");
        return;
    }
    if lo == f64::NEG_INFINITY && up == f64::INFINITY {
        let _ = writeln!(out, " FR BND {name}");
        return;
    }
    if lo == f64::NEG_INFINITY {
        let _ = writeln!(out, " MI BND {name}");
    } else if lo != 0.0 || var.integer {
        let _ = writeln!(out, " LO BND {name} {lo}");
    }
    if up != f64::INFINITY {
        let _ = writeln!(out, " UP BND {name} {up}");
    } else if var.integer {
        let _ = writeln!(out, " PL BND {name}");
    }
}

/// CPLEX LP text for `model`.
pub fn write_lp(model: &MilpModel, name: &str) -> String {
    let names: Vec<String> = model.variables().iter().map(|v| v.reference.name()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {name}");
    out.push_str("Minimize\n");
    let objective: Vec<(usize, f64)> = model.objective_terms().collect();
    write_lp_expression(&mut out, &format_label(OBJECTIVE_ROW), &objective, &names);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in model.constraints() {
        let label = format_label(&alloc::format!("{}", c.tag));
        write_lp_expression(&mut out, &label, &c.terms, &names);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }

    out.push_str("Bounds\n");
    for (var, name) in model.variables().iter().zip(&names) {
        let (lo, up) = (var.lower, var.upper);
        if lo == up {
            let _ = writeln!(out, " {name} = {lo}");
        } else if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let lo_s = if lo == f64::NEG_INFINITY {
                String::from("-inf")
            } else {
                alloc::format!("{lo}")
            };
            let up_s = if up == f64::INFINITY {
                String::from("+inf")
            } else {
                alloc::format!("{up}")
            };
            let _ = writeln!(out, " {lo_s} <= {name} <= {up_s}");
        }
    }

    let integers: Vec<&String> = model
        .variables()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer)
        .map(|(_, n)| n)
        .collect();
    if !integers.is_empty() {
        out.push_str("Generals\n");
        for chunk in integers.chunks(8) {
            out.push(' ');
            for n in chunk {
                out.push_str(n);
                out.push(' ');
            }
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

fn format_label(name: &str) -> String {
    alloc::format!(" {name}:")
}

fn write_lp_expression(out: &mut String, label: &str, terms: &[(usize, f64)], names: &[String]) {
    out.push_str(label);
    let mut written = 0;
    for &(j, a) in terms {
        if a == 0.0 {
            continue;
        }
        if written > 0 && written % 6 == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), names[j]);
        written += 1;
    }
    if written == 0 {
        // An empty expression still needs a term to parse.
        match names.first() {
            Some(n) => {
                let _ = write!(out, " 0 {n}");
            }
            None => out.push_str(" 0"),
        }
    }
}
