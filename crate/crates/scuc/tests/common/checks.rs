//! Physical checks on solved storage, pair and switching models, and the
//! random small cases they are exercised on.

use proptest::prelude::*;
use scuc::gateway::SolverConfig;
use scuc_core::grid::{BranchId, Case};
use scuc_core::metrics::storage_profile;
use scuc_core::model::{MilpModel, VarKind};

use super::*;

pub const TOL: f64 = 1e-6;

pub fn exact() -> SolverConfig {
    SolverConfig { mip_gap: 1e-9, time_limit_s: 60.0, ..SolverConfig::default() }
}

fn val(m: &MilpModel, values: &[f64], kind: VarKind, e: u32, t: usize) -> Result<f64, String> {
    m.var_index(kind, e, t).map(|j| values[j]).ok_or_else(|| format!("no {kind:?} column for {e} at hour {t}"))
}

/// Mode exclusivity, power and energy limits, and the state-of-charge
/// recurrence replayed from the initial level.
pub fn check_storage(case: &Case, m: &MilpModel, values: &[f64]) -> Result<(), String> {
    let dt = case.meta.interval_hours;
    for e in &case.storage {
        let id = e.id.0;
        let mut prev = e.e_initial_mwh;
        for t in 0..case.horizon() {
            let pc = val(m, values, VarKind::Charge, id, t)?;
            let pd = val(m, values, VarKind::Discharge, id, t)?;
            let soc = val(m, values, VarKind::Energy, id, t)?;
            if pc * pd >= TOL {
                return Err(format!("unit {id} charges {pc} and discharges {pd} at hour {t}"));
            }
            if pc > e.p_charge_max_mw + TOL || pd > e.p_discharge_max_mw + TOL || pc < -TOL || pd < -TOL {
                return Err(format!("unit {id} power out of range at hour {t}: {pc}, {pd}"));
            }
            if soc < e.e_min_mwh - TOL || soc > e.e_max_mwh + TOL {
                return Err(format!("unit {id} energy {soc} out of range at hour {t}"));
            }
            let expected = prev + (e.eta_charge * pc - pd / e.eta_discharge) * dt;
            if (soc - expected).abs() >= TOL {
                return Err(format!("unit {id} hour {t}: energy {soc} vs recurrence {expected}"));
            }
            prev = soc;
        }
    }
    storage_profile(m, values, case, TOL).map(|_| ()).map_err(|e| e.to_string())
}

/// No hour with both members of a pair charging, or both discharging.
pub fn check_pairs(case: &Case, m: &MilpModel, values: &[f64]) -> Result<(), String> {
    for pair in &case.vt_pairs {
        for t in 0..case.horizon() {
            let (a, b) = (pair.storage_a.0, pair.storage_b.0);
            let on = |kind, e| val(m, values, kind, e, t).map(|x| x > 0.5);
            if on(VarKind::ChargeMode, a)? && on(VarKind::ChargeMode, b)? {
                return Err(format!("pair {} both charging at hour {t}", pair.id.0));
            }
            if on(VarKind::DischargeMode, a)? && on(VarKind::DischargeMode, b)? {
                return Err(format!("pair {} both discharging at hour {t}", pair.id.0));
            }
        }
    }
    Ok(())
}

/// At most one switchable branch open per hour, open branches idle, closed
/// branches on the DC flow equation and within rating.
pub fn check_switching(case: &Case, m: &MilpModel, values: &[f64], feas_tol: f64) -> Result<(), String> {
    for t in 0..case.horizon() {
        let mut open = 0;
        for k in &case.branches {
            let flow = val(m, values, VarKind::Flow, k.id.0, t)?;
            let in_service = match m.var_index(VarKind::InService, k.id.0, t) {
                Some(j) => values[j] > 0.5,
                None => true,
            };
            if !in_service {
                open += 1;
                if flow.abs() > feas_tol {
                    return Err(format!("open branch {} carries {flow} MW at hour {t}", k.id.0));
                }
                continue;
            }
            let spread = val(m, values, VarKind::Angle, k.from_bus.0, t)? - val(m, values, VarKind::Angle, k.to_bus.0, t)?;
            let dc = spread * case.meta.base_mva / k.reactance;
            // Row tolerance scaled by the largest coefficient of the row.
            let scale = 1.0 + case.meta.base_mva / k.reactance;
            if (flow - dc).abs() > feas_tol * scale {
                return Err(format!("closed branch {} at hour {t}: {flow} vs {dc}", k.id.0));
            }
            if flow.abs() > k.rating_mw + feas_tol {
                return Err(format!("branch {} over rating at hour {t}", k.id.0));
            }
        }
        if open > 1 {
            return Err(format!("{open} branches open at hour {t}"));
        }
    }
    Ok(())
}

pub const PAIR_HOURS: usize = 4;

/// A cheap unit at bus 1, a dear unit at bus 3, load at buses 2 and 3, and
/// storage at buses 2 and 3 paired across branch 2 (2-3).
pub fn arb_pair_case() -> impl Strategy<Value = Case> {
    (
        (10.0..30.0f64, 40.0..80.0f64, 0.0..2000.0f64),
        prop::collection::vec(40.0..160.0f64, 3),
        prop::collection::vec(0.3..1.0f64, PAIR_HOURS),
        (20.0..120.0f64, 10.0..60.0f64, 0.0..1.0f64),
        prop::collection::vec(0.0..120.0f64, 2),
    )
        .prop_map(|((cheap, dear, startup), ratings, shape, (energy, power, soc), peaks)| {
            let mut c = empty_case(3, PAIR_HOURS);
            add_line(&mut c, 1, 2, 0.1, ratings[0]);
            add_line(&mut c, 2, 3, 0.1, ratings[1]);
            add_line(&mut c, 1, 3, 0.2, ratings[2]);
            add_gen(&mut c, 1, 0.0, 400.0, cheap, 0.0, startup);
            add_gen(&mut c, 3, 0.0, 300.0, dear, 10.0, 50.0);
            let a = add_storage(&mut c, 2, energy, power, soc * energy);
            let b = add_storage(&mut c, 3, energy, power, soc * energy);
            add_vt_pair(&mut c, a, b, BranchId(2));
            set_load_shape(&mut c, &[(2, peaks[0]), (3, peaks[1])], &shape);
            c
        })
}
