//! Brute-force commitment oracle: every on/off pattern is priced by a
//! dispatch LP written here against microlp directly.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use scuc_core::grid::Case;

use super::*;

/// Cheapest dispatch cost for a fixed commitment, `None` if infeasible.
pub fn dispatch_cost(case: &Case, on: &[Vec<bool>]) -> Option<f64> {
    let hours = case.horizon();
    let base = case.meta.base_mva;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut fixed = 0.0;
    let mut p = Vec::new();
    for (gi, g) in case.generators.iter().enumerate() {
        let mut row = Vec::new();
        let mut was_on = g.initial_on;
        for t in 0..hours {
            let u = on[gi][t];
            if u {
                fixed += g.cost_noload * case.meta.interval_hours;
                if !was_on {
                    fixed += g.cost_startup;
                }
            }
            was_on = u;
            let (lo, hi) = if u { (g.p_min_mw, g.p_max_mw) } else { (0.0, 0.0) };
            row.push(lp.add_var(g.cost_energy * case.meta.interval_hours, (lo, hi)));
        }
        p.push(row);
    }
    for (gi, g) in case.generators.iter().enumerate() {
        let r = g.ramp_limit();
        for t in 0..hours {
            if t == 0 {
                lp.add_constraint([(p[gi][0], 1.0)], ComparisonOp::Le, r + g.initial_output_mw);
                lp.add_constraint([(p[gi][0], 1.0)], ComparisonOp::Ge, g.initial_output_mw - r);
            } else {
                lp.add_constraint([(p[gi][t], 1.0), (p[gi][t - 1], -1.0)], ComparisonOp::Le, r);
                lp.add_constraint([(p[gi][t], 1.0), (p[gi][t - 1], -1.0)], ComparisonOp::Ge, -r);
            }
        }
    }
    for t in 0..hours {
        let theta: Vec<_> = case
            .buses
            .iter()
            .map(|b| {
                let span = if b.id == case.meta.reference_bus { 0.0 } else { std::f64::consts::PI };
                lp.add_var(0.0, (-span, span))
            })
            .collect();
        let mut injections: Vec<Vec<(microlp::Variable, f64)>> = vec![Vec::new(); case.buses.len()];
        for (gi, g) in case.generators.iter().enumerate() {
            injections[g.bus.0 as usize - 1].push((p[gi][t], 1.0));
        }
        for k in &case.branches {
            let (f, to) = (k.from_bus.0 as usize - 1, k.to_bus.0 as usize - 1);
            let b = base / k.reactance;
            lp.add_constraint([(theta[f], b), (theta[to], -b)], ComparisonOp::Le, k.rating_mw);
            lp.add_constraint([(theta[f], b), (theta[to], -b)], ComparisonOp::Ge, -k.rating_mw);
            // Flow leaves `f` and enters `to`.
            injections[f].push((theta[f], -b));
            injections[f].push((theta[to], b));
            injections[to].push((theta[f], b));
            injections[to].push((theta[to], -b));
        }
        for (i, bus) in case.buses.iter().enumerate() {
            let net = case.demand(bus.id, t).unwrap() - case.solar_injection(bus.id, t).unwrap();
            let mut terms: Vec<(microlp::Variable, f64)> = Vec::new();
            for &(v, a) in &injections[i] {
                match terms.iter_mut().find(|(w, _)| *w == v) {
                    Some(e) => e.1 += a,
                    None => terms.push((v, a)),
                }
            }
            lp.add_constraint(terms, ComparisonOp::Eq, net);
        }
    }
    match lp.solve() {
        Ok(microlp::SolveOutcome::Solution(s)) => Some(s.objective() + fixed),
        Ok(microlp::SolveOutcome::Interrupted(_)) => panic!("oracle LP interrupted"),
        Err(microlp::Error::Infeasible) => None,
        Err(e) => panic!("oracle LP failed: {e}"),
    }
}

pub fn enumerate(case: &Case) -> Option<f64> {
    let g = case.generators.len();
    let hours = case.horizon();
    let bits = g * hours;
    assert!(bits <= 10);
    (0u32..1 << bits)
        .filter_map(|mask| {
            let on: Vec<Vec<bool>> =
                (0..g).map(|gi| (0..hours).map(|t| mask >> (gi * hours + t) & 1 == 1).collect()).collect();
            dispatch_cost(case, &on)
        })
        .min_by(|a, b| a.total_cmp(b))
}

/// Three buses in a loop, a cheap unit at bus 1 behind a 60 MW line and a
/// dear unit at bus 3, two hours.
pub fn three_bus_case() -> Case {
    let mut c = empty_case(3, 2);
    add_line(&mut c, 1, 2, 0.1, 200.0);
    add_line(&mut c, 2, 3, 0.1, 200.0);
    add_line(&mut c, 1, 3, 0.1, 60.0);
    add_gen(&mut c, 1, 30.0, 250.0, 18.0, 300.0, 900.0);
    add_gen(&mut c, 3, 10.0, 120.0, 35.0, 60.0, 100.0);
    set_load_shape(&mut c, &[(2, 60.0), (3, 110.0)], &[0.6, 1.0]);
    c
}
