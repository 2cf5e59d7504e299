//! MILP builders for the seven scheduling schemes.
//!
//! Every scheme shares the unit-commitment core (objective, start-up logic,
//! output and ramp limits). The network is a DC power flow on nodal angles
//! with the reference angle fixed to zero; storage schemes add per-unit mode,
//! power, energy and state-of-charge rows and put storage power into the
//! nodal balance; virtual transmission couples the modes of the two units of
//! a pair; reconfiguration replaces the flow rows of switchable branches with
//! big-M rows gated by an in-service binary.
//!
//! Rows and integrality declarations carry a group number:
//!
//! | group  | content                                                  |
//! |--------|----------------------------------------------------------|
//! | 1      | total cost                                               |
//! | 2, 3   | commitment and start-up binaries                         |
//! | 4      | start-up logic                                           |
//! | 5, 6   | output floor and ceiling                                 |
//! | 7, 8   | ramp up and down                                         |
//! | 9, 10  | DC flow definition and thermal limits                    |
//! | 11     | nodal balance                                            |
//! | 12     | storage charge/discharge exclusivity                     |
//! | 13, 14 | charge and discharge power limits                        |
//! | 15     | energy bounds                                            |
//! | 16     | state-of-charge recurrence                                |
//! | 17     | nodal balance with storage power (replaces 11)           |
//! | 18, 19 | pair charging and discharging coupling                   |
//! | 20     | in-service binaries                                      |
//! | 21     | switching budget                                         |
//! | 22, 23 | gated flow definition and limits                         |
//!
//! | scheme          | groups                          |
//! |-----------------|---------------------------------|
//! | SCUC, SCUC_PT   | 1-11                            |
//! | SCUC_BESS       | 1-10, 12-17                     |
//! | SCUC_VT         | 1-10, 12-19                     |
//! | SCUC_NR         | 1-11, 20-23                     |
//! | SCUC_BESS_NR    | 1-10, 12-17, 20-23              |
//! | SCUC_VT_NR      | 1-10, 12-23                     |
//!
//! Switchable branches get 22-23 instead of 9-10; the rest keep 9-10.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::grid::{Case, CaseError};
use crate::model::{Family, MilpModel, ModelError, Sense, Tag, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeId {
    Scuc,
    ScucPt,
    ScucBess,
    ScucVt,
    ScucNr,
    ScucBessNr,
    ScucVtNr,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] = [
        SchemeId::Scuc,
        SchemeId::ScucPt,
        SchemeId::ScucBess,
        SchemeId::ScucVt,
        SchemeId::ScucNr,
        SchemeId::ScucBessNr,
        SchemeId::ScucVtNr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Scuc => "SCUC",
            SchemeId::ScucPt => "SCUC_PT",
            SchemeId::ScucBess => "SCUC_BESS",
            SchemeId::ScucVt => "SCUC_VT",
            SchemeId::ScucNr => "SCUC_NR",
            SchemeId::ScucBessNr => "SCUC_BESS_NR",
            SchemeId::ScucVtNr => "SCUC_VT_NR",
        }
    }

    pub fn has_storage(self) -> bool {
        matches!(
            self,
            SchemeId::ScucBess | SchemeId::ScucVt | SchemeId::ScucBessNr | SchemeId::ScucVtNr
        )
    }

    pub fn has_vt(self) -> bool {
        matches!(self, SchemeId::ScucVt | SchemeId::ScucVtNr)
    }

    pub fn has_reconfiguration(self) -> bool {
        matches!(self, SchemeId::ScucNr | SchemeId::ScucBessNr | SchemeId::ScucVtNr)
    }

    pub fn is_parallel_line(self) -> bool {
        self == SchemeId::ScucPt
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown scheme {0:?}")]
pub struct UnknownScheme(pub String);

impl FromStr for SchemeId {
    type Err = UnknownScheme;

    /// Accepts `SCUC_VT`, `SCUC-VT` and lowercase spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .map(|c| if c == '-' { '_' } else { c.to_ascii_uppercase() })
            .collect();
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == norm)
            .ok_or_else(|| UnknownScheme(s.into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulationConfig {
    /// Explicit big-M for the reconfiguration rows, MW.
    pub big_m: Option<f64>,
    /// Upper cap applied to the computed default big-M, MW.
    pub big_m_cap: f64,
    /// Nodal angles are bounded to `[-angle_limit_rad, angle_limit_rad]`.
    pub angle_limit_rad: f64,
}

impl Default for FormulationConfig {
    fn default() -> Self {
        Self {
            big_m: None,
            big_m_cap: 10_000.0,
            angle_limit_rad: PI,
        }
    }
}

impl FormulationConfig {
    /// Big-M used for `case`: the configured value, or the widest flow an
    /// open switchable branch could imply across the full angle span, capped.
    pub fn resolve_big_m(&self, case: &Case) -> f64 {
        if let Some(m) = self.big_m {
            return m;
        }
        let x_min = case
            .branches
            .iter()
            .filter(|b| b.switchable)
            .map(|b| b.reactance)
            .fold(f64::INFINITY, f64::min);
        if !x_min.is_finite() {
            return self.big_m_cap;
        }
        (2.0 * self.angle_limit_rad * case.meta.base_mva / x_min).min(self.big_m_cap)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("{0} needs at least one storage unit")]
    MissingStorage(SchemeId),
    #[error("{0} needs at least one virtual-transmission pair")]
    MissingVtPairs(SchemeId),
    #[error("SCUC_PT needs a case with an added parallel line")]
    MissingParallelLine,
    #[error("{what} has {len} entries for a {horizon}-hour horizon")]
    HorizonMismatch {
        what: &'static str,
        len: usize,
        horizon: usize,
    },
    #[error("big-M must be positive, got {0}")]
    InvalidBigM(f64),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_horizon(case: &Case) -> Result<(), BuildError> {
    let horizon = case.horizon();
    let load = case.load.hourly_fraction.len();
    if load != horizon {
        return Err(BuildError::HorizonMismatch {
            what: "load profile",
            len: load,
            horizon,
        });
    }
    if let Some(s) = case.solar.iter().find(|s| s.profile.len() != horizon) {
        return Err(BuildError::HorizonMismatch {
            what: "solar profile",
            len: s.profile.len(),
            horizon,
        });
    }
    Ok(())
}

/// Builds the MILP for `scheme` on `case`.
pub fn build(case: &Case, scheme: SchemeId, cfg: &FormulationConfig) -> Result<MilpModel, BuildError> {
    check_horizon(case)?;
    case.validate()?;
    if scheme.has_storage() && case.storage.is_empty() {
        return Err(BuildError::MissingStorage(scheme));
    }
    if scheme.has_vt() && case.vt_pairs.is_empty() {
        return Err(BuildError::MissingVtPairs(scheme));
    }
    if scheme.is_parallel_line() && !case.branches.iter().any(|b| b.parallel_of.is_some()) {
        return Err(BuildError::MissingParallelLine);
    }

    let mut model = MilpModel::new(scheme);
    register_variables(&mut model, case, scheme, cfg)?;
    add_objective(&mut model, case)?;
    add_commitment_logic(&mut model, case)?;
    add_generator_limits(&mut model, case)?;
    add_dc_network(&mut model, case)?;
    if scheme.has_storage() {
        add_storage(&mut model, case)?;
    }
    if scheme.has_vt() {
        add_vt_coupling(&mut model, case)?;
    }
    if scheme.has_reconfiguration() {
        add_reconfiguration(&mut model, case, cfg.resolve_big_m(case))?;
    }
    Ok(model)
}

fn register_variables(
    model: &mut MilpModel,
    case: &Case,
    scheme: SchemeId,
    cfg: &FormulationConfig,
) -> Result<(), ModelError> {
    let horizon = case.horizon();
    for g in &case.generators {
        for t in 0..horizon {
            model.add_binary(VarKind::Commitment, g.id.0, t)?;
            model.add_binary(VarKind::Startup, g.id.0, t)?;
            model.add_variable(VarKind::Output, g.id.0, t, 0.0, f64::INFINITY, false)?;
        }
    }
    for bus in &case.buses {
        let limit = if bus.id == case.meta.reference_bus {
            0.0
        } else {
            cfg.angle_limit_rad
        };
        for t in 0..horizon {
            model.add_variable(VarKind::Angle, bus.id.0, t, -limit, limit, false)?;
        }
    }
    for k in &case.branches {
        for t in 0..horizon {
            model.add_variable(VarKind::Flow, k.id.0, t, f64::NEG_INFINITY, f64::INFINITY, false)?;
        }
    }
    if scheme.has_storage() {
        for e in &case.storage {
            for t in 0..horizon {
                model.add_variable(VarKind::Charge, e.id.0, t, 0.0, f64::INFINITY, false)?;
                model.add_variable(VarKind::Discharge, e.id.0, t, 0.0, f64::INFINITY, false)?;
                model.add_variable(VarKind::Energy, e.id.0, t, 0.0, f64::INFINITY, false)?;
                model.add_binary(VarKind::ChargeMode, e.id.0, t)?;
                model.add_binary(VarKind::DischargeMode, e.id.0, t)?;
            }
        }
    }
    if scheme.has_reconfiguration() {
        for k in case.branches.iter().filter(|k| k.switchable) {
            for t in 0..horizon {
                model.add_binary(VarKind::InService, k.id.0, t)?;
            }
        }
    }
    Ok(())
}

/// Total cost: energy, no-load and start-up cost of every unit and hour.
pub fn add_objective(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    let dt = case.meta.interval_hours;
    for g in &case.generators {
        for t in 0..case.horizon() {
            let p = model.require_var(VarKind::Output, g.id.0, t)?;
            let u = model.require_var(VarKind::Commitment, g.id.0, t)?;
            let v = model.require_var(VarKind::Startup, g.id.0, t)?;
            model.add_objective_term(p, g.cost_energy * dt)?;
            model.add_objective_term(u, g.cost_noload * dt)?;
            model.add_objective_term(v, g.cost_startup)?;
        }
    }
    Ok(())
}

/// `v_gt >= u_gt - u_g,t-1`, with the hour before the horizon taken from
/// each generator's initial status.
pub fn add_commitment_logic(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    for g in &case.generators {
        for t in 0..case.horizon() {
            let u = model.require_var(VarKind::Commitment, g.id.0, t)?;
            let v = model.require_var(VarKind::Startup, g.id.0, t)?;
            let tag = Tag::new(Family::Startup, g.id.0, t);
            if t == 0 {
                let u0 = if g.initial_on { 1.0 } else { 0.0 };
                model.add_constraint(tag, 4, vec![(v, 1.0), (u, -1.0)], Sense::Ge, -u0)?;
            } else {
                let prev = model.require_var(VarKind::Commitment, g.id.0, t - 1)?;
                model.add_constraint(tag, 4, vec![(v, 1.0), (u, -1.0), (prev, 1.0)], Sense::Ge, 0.0)?;
            }
        }
    }
    Ok(())
}

/// Output limits gated by commitment and hourly ramp limits in both
/// directions. Hour 0 ramps from the generator's initial output.
pub fn add_generator_limits(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    for g in &case.generators {
        let id = g.id.0;
        let ramp = g.ramp_limit();
        for t in 0..case.horizon() {
            let p = model.require_var(VarKind::Output, id, t)?;
            let u = model.require_var(VarKind::Commitment, id, t)?;
            model.add_constraint(
                Tag::new(Family::OutputMin, id, t),
                5,
                vec![(p, 1.0), (u, -g.p_min_mw)],
                Sense::Ge,
                0.0,
            )?;
            model.add_constraint(
                Tag::new(Family::OutputMax, id, t),
                6,
                vec![(p, 1.0), (u, -g.p_max_mw)],
                Sense::Le,
                0.0,
            )?;
            if t == 0 {
                let p0 = g.initial_output_mw;
                model.add_constraint(Tag::new(Family::RampUp, id, t), 7, vec![(p, 1.0)], Sense::Le, ramp + p0)?;
                model.add_constraint(Tag::new(Family::RampDown, id, t), 8, vec![(p, -1.0)], Sense::Le, ramp - p0)?;
            } else {
                let prev = model.require_var(VarKind::Output, id, t - 1)?;
                model.add_constraint(
                    Tag::new(Family::RampUp, id, t),
                    7,
                    vec![(p, 1.0), (prev, -1.0)],
                    Sense::Le,
                    ramp,
                )?;
                model.add_constraint(
                    Tag::new(Family::RampDown, id, t),
                    8,
                    vec![(prev, 1.0), (p, -1.0)],
                    Sense::Le,
                    ramp,
                )?;
            }
        }
    }
    Ok(())
}

/// DC flow definition and thermal limits for every branch without an
/// in-service variable, then the nodal balance of every bus and hour.
///
/// The balance includes storage power (the storage variant of the balance)
/// whenever storage variables are registered in the model.
pub fn add_dc_network(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    let base = case.meta.base_mva;
    for k in &case.branches {
        for t in 0..case.horizon() {
            if model.var_index(VarKind::InService, k.id.0, t).is_some() {
                continue;
            }
            let flow = model.require_var(VarKind::Flow, k.id.0, t)?;
            let from = model.require_var(VarKind::Angle, k.from_bus.0, t)?;
            let to = model.require_var(VarKind::Angle, k.to_bus.0, t)?;
            let b = base / k.reactance;
            model.add_constraint(
                Tag::new(Family::FlowDefinition, k.id.0, t),
                9,
                vec![(flow, 1.0), (from, -b), (to, b)],
                Sense::Eq,
                0.0,
            )?;
            model.add_constraint(Tag::new(Family::FlowMax, k.id.0, t), 10, vec![(flow, 1.0)], Sense::Le, k.rating_mw)?;
            model.add_constraint(Tag::new(Family::FlowMin, k.id.0, t), 10, vec![(flow, 1.0)], Sense::Ge, -k.rating_mw)?;
        }
    }
    add_nodal_balance(model, case)
}

fn add_nodal_balance(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    let with_storage = case
        .storage
        .first()
        .is_some_and(|e| model.var_index(VarKind::Charge, e.id.0, 0).is_some());
    let equation = if with_storage { 17 } else { 11 };
    for bus in &case.buses {
        let n = bus.id;
        for t in 0..case.horizon() {
            let mut terms = Vec::new();
            for g in case.generators.iter().filter(|g| g.bus == n) {
                terms.push((model.require_var(VarKind::Output, g.id.0, t)?, 1.0));
            }
            for k in &case.branches {
                if k.to_bus == n {
                    terms.push((model.require_var(VarKind::Flow, k.id.0, t)?, 1.0));
                } else if k.from_bus == n {
                    terms.push((model.require_var(VarKind::Flow, k.id.0, t)?, -1.0));
                }
            }
            if with_storage {
                for e in case.storage.iter().filter(|e| e.bus == n) {
                    terms.push((model.require_var(VarKind::Charge, e.id.0, t)?, -1.0));
                    terms.push((model.require_var(VarKind::Discharge, e.id.0, t)?, 1.0));
                }
            }
            let rhs = case.demand(n, t).expect("validated bus and hour")
                - case.solar_injection(n, t).expect("validated bus and hour");
            model.add_constraint(Tag::balance(n.0, t), equation, terms, Sense::Eq, rhs)?;
        }
    }
    Ok(())
}

/// Storage mode exclusivity, power limits gated by mode, energy bounds and
/// the state-of-charge recurrence. Units flagged `cyclic` also get a
/// terminal row `E_T >= E_initial`.
pub fn add_storage(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    let dt = case.meta.interval_hours;
    for e in &case.storage {
        let id = e.id.0;
        for t in 0..case.horizon() {
            let pc = model.require_var(VarKind::Charge, id, t)?;
            let pd = model.require_var(VarKind::Discharge, id, t)?;
            let soc = model.require_var(VarKind::Energy, id, t)?;
            let uc = model.require_var(VarKind::ChargeMode, id, t)?;
            let ud = model.require_var(VarKind::DischargeMode, id, t)?;
            model.add_constraint(
                Tag::new(Family::StorageMode, id, t),
                12,
                vec![(uc, 1.0), (ud, 1.0)],
                Sense::Le,
                1.0,
            )?;
            model.add_constraint(
                Tag::new(Family::ChargeMax, id, t),
                13,
                vec![(pc, 1.0), (uc, -e.p_charge_max_mw)],
                Sense::Le,
                0.0,
            )?;
            model.add_constraint(
                Tag::new(Family::DischargeMax, id, t),
                14,
                vec![(pd, 1.0), (ud, -e.p_discharge_max_mw)],
                Sense::Le,
                0.0,
            )?;
            model.add_constraint(Tag::new(Family::EnergyMin, id, t), 15, vec![(soc, 1.0)], Sense::Ge, e.e_min_mwh)?;
            model.add_constraint(Tag::new(Family::EnergyMax, id, t), 15, vec![(soc, 1.0)], Sense::Le, e.e_max_mwh)?;
            let mut terms = vec![(soc, 1.0), (pc, -e.eta_charge * dt), (pd, dt / e.eta_discharge)];
            let rhs = if t == 0 {
                e.e_initial_mwh
            } else {
                terms.push((model.require_var(VarKind::Energy, id, t - 1)?, -1.0));
                0.0
            };
            model.add_constraint(Tag::new(Family::EnergyBalance, id, t), 16, terms, Sense::Eq, rhs)?;
        }
        if e.cyclic {
            let last = model.require_var(VarKind::Energy, id, case.horizon() - 1)?;
            let tag = Tag {
                family: Family::EnergyTerminal,
                entity: Some(id),
                hour: None,
            };
            model.add_constraint(tag, 0, vec![(last, 1.0)], Sense::Ge, e.e_initial_mwh)?;
        }
    }
    Ok(())
}

/// At most one unit of each pair charging, and at most one discharging, per
/// hour.
pub fn add_vt_coupling(model: &mut MilpModel, case: &Case) -> Result<(), ModelError> {
    for pair in &case.vt_pairs {
        for t in 0..case.horizon() {
            let (a, b) = (pair.storage_a.0, pair.storage_b.0);
            let ca = model.require_var(VarKind::ChargeMode, a, t)?;
            let cb = model.require_var(VarKind::ChargeMode, b, t)?;
            let da = model.require_var(VarKind::DischargeMode, a, t)?;
            let db = model.require_var(VarKind::DischargeMode, b, t)?;
            model.add_constraint(
                Tag::new(Family::VtCharge, pair.id.0, t),
                18,
                vec![(ca, 1.0), (cb, 1.0)],
                Sense::Le,
                1.0,
            )?;
            model.add_constraint(
                Tag::new(Family::VtDischarge, pair.id.0, t),
                19,
                vec![(da, 1.0), (db, 1.0)],
                Sense::Le,
                1.0,
            )?;
        }
    }
    Ok(())
}

/// Big-M flow rows and in-service-gated limits for switchable branches,
/// plus a budget of at most one open switchable branch per hour.
pub fn add_reconfiguration(model: &mut MilpModel, case: &Case, big_m: f64) -> Result<(), BuildError> {
    if !(big_m > 0.0 && big_m.is_finite()) {
        return Err(BuildError::InvalidBigM(big_m));
    }
    model.big_m = Some(big_m);
    let base = case.meta.base_mva;
    for t in 0..case.horizon() {
        let mut budget = Vec::new();
        for k in case.branches.iter().filter(|k| k.switchable) {
            let id = k.id.0;
            let j = model.require_var(VarKind::InService, id, t)?;
            let flow = model.require_var(VarKind::Flow, id, t)?;
            let from = model.require_var(VarKind::Angle, k.from_bus.0, t)?;
            let to = model.require_var(VarKind::Angle, k.to_bus.0, t)?;
            let b = base / k.reactance;
            model.add_constraint(
                Tag::new(Family::SwitchFlowUpper, id, t),
                22,
                vec![(flow, 1.0), (from, -b), (to, b), (j, big_m)],
                Sense::Le,
                big_m,
            )?;
            model.add_constraint(
                Tag::new(Family::SwitchFlowLower, id, t),
                22,
                vec![(flow, 1.0), (from, -b), (to, b), (j, -big_m)],
                Sense::Ge,
                -big_m,
            )?;
            model.add_constraint(
                Tag::new(Family::SwitchLimitMax, id, t),
                23,
                vec![(flow, 1.0), (j, -k.rating_mw)],
                Sense::Le,
                0.0,
            )?;
            model.add_constraint(
                Tag::new(Family::SwitchLimitMin, id, t),
                23,
                vec![(flow, 1.0), (j, k.rating_mw)],
                Sense::Ge,
                0.0,
            )?;
            budget.push((j, -1.0));
        }
        if !budget.is_empty() {
            let rhs = 1.0 - budget.len() as f64;
            let tag = Tag {
                family: Family::SwitchBudget,
                entity: None,
                hour: Some(t),
            };
            model.add_constraint(tag, 21, budget, Sense::Le, rhs)?;
        }
    }
    Ok(())
}
