//! Solver-independent MILP container: a typed variable registry, tagged
//! linear rows and a linear objective.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::formulation::SchemeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// `u_gt`
    Commitment,
    /// `v_gt`
    Startup,
    /// `P_gt`
    Output,
    /// Nodal voltage angle `θ_nt`, radians.
    Angle,
    /// `P_kt`
    Flow,
    /// `P^c_et`
    Charge,
    /// `P^d_et`
    Discharge,
    /// `E_et`
    Energy,
    /// `u^c_et`
    ChargeMode,
    /// `u^d_et`
    DischargeMode,
    /// `J_kt`
    InService,
}

impl VarKind {
    pub fn symbol(self) -> &'static str {
        match self {
            VarKind::Commitment => "u",
            VarKind::Startup => "v",
            VarKind::Output => "p",
            VarKind::Angle => "theta",
            VarKind::Flow => "pk",
            VarKind::Charge => "pc",
            VarKind::Discharge => "pd",
            VarKind::Energy => "soc",
            VarKind::ChargeMode => "uc",
            VarKind::DischargeMode => "ud",
            VarKind::InService => "j",
        }
    }

    fn entity_prefix(self) -> &'static str {
        match self {
            VarKind::Commitment | VarKind::Startup | VarKind::Output => "g",
            VarKind::Angle => "n",
            VarKind::Flow | VarKind::InService => "k",
            _ => "e",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarRef {
    pub kind: VarKind,
    pub entity: u32,
    pub hour: usize,
    /// Dense column position in the model.
    pub index: usize,
}

impl VarRef {
    pub fn name(&self) -> String {
        alloc::format!(
            "{}_{}{}_t{}",
            self.kind.symbol(),
            self.kind.entity_prefix(),
            self.entity,
            self.hour
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub reference: VarRef,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

/// Constraint family; the row-name prefix of every tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Startup,
    OutputMin,
    OutputMax,
    RampUp,
    RampDown,
    FlowDefinition,
    FlowMax,
    FlowMin,
    Balance,
    StorageMode,
    ChargeMax,
    DischargeMax,
    EnergyMin,
    EnergyMax,
    EnergyBalance,
    EnergyTerminal,
    VtCharge,
    VtDischarge,
    SwitchBudget,
    SwitchFlowUpper,
    SwitchFlowLower,
    SwitchLimitMax,
    SwitchLimitMin,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Startup => "startup",
            Family::OutputMin => "pmin",
            Family::OutputMax => "pmax",
            Family::RampUp => "ramp_up",
            Family::RampDown => "ramp_down",
            Family::FlowDefinition => "flow",
            Family::FlowMax => "flow_max",
            Family::FlowMin => "flow_min",
            Family::Balance => "balance",
            Family::StorageMode => "storage_mode",
            Family::ChargeMax => "charge_max",
            Family::DischargeMax => "discharge_max",
            Family::EnergyMin => "energy_min",
            Family::EnergyMax => "energy_max",
            Family::EnergyBalance => "energy_balance",
            Family::EnergyTerminal => "energy_terminal",
            Family::VtCharge => "vt_charge",
            Family::VtDischarge => "vt_discharge",
            Family::SwitchBudget => "switch_budget",
            Family::SwitchFlowUpper => "switch_flow_up",
            Family::SwitchFlowLower => "switch_flow_dn",
            Family::SwitchLimitMax => "switch_max",
            Family::SwitchLimitMin => "switch_min",
        }
    }

    fn entity_prefix(self) -> &'static str {
        match self {
            Family::Startup
            | Family::OutputMin
            | Family::OutputMax
            | Family::RampUp
            | Family::RampDown => "g",
            Family::FlowDefinition
            | Family::FlowMax
            | Family::FlowMin
            | Family::SwitchFlowUpper
            | Family::SwitchFlowLower
            | Family::SwitchLimitMax
            | Family::SwitchLimitMin => "k",
            Family::Balance => "n",
            Family::VtCharge | Family::VtDischarge => "vt",
            Family::SwitchBudget => "",
            _ => "e",
        }
    }
}

/// Family, entity and hour of a row. Unique within a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub family: Family,
    pub entity: Option<u32>,
    pub hour: Option<usize>,
}

impl Tag {
    pub fn new(family: Family, entity: u32, hour: usize) -> Self {
        Self {
            family,
            entity: Some(entity),
            hour: Some(hour),
        }
    }

    pub fn balance(bus: u32, hour: usize) -> Self {
        Self::new(Family::Balance, bus, hour)
    }
}

impl fmt::Display for Tag {
    /// Row name, `family_entity_hour`, e.g. `balance_n11_t13`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        if let Some(e) = self.entity {
            write!(f, "_{}{}", self.family.entity_prefix(), e)?;
        }
        if let Some(t) = self.hour {
            write!(f, "_t{t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: Tag,
    /// Group number (see the `formulation` module table), or 0 for rows
    /// outside the numbered groups (optional terminal storage rows).
    pub equation: u8,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates the row; zero when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("variable {0} registered twice")]
    DuplicateVariable(String),
    #[error("row {0} registered twice")]
    DuplicateTag(String),
    #[error("row {tag} lists column {column} twice")]
    DuplicateTerm { tag: String, column: usize },
    #[error("column index {0} out of range")]
    BadColumn(usize),
    #[error("variable {0} is not registered")]
    MissingVariable(String),
    #[error("value vector has {found} entries for {expected} columns")]
    ValueLength { expected: usize, found: usize },
    #[error("integer column {name} has non-integral value {value}")]
    NotIntegral { name: String, value: f64 },
}

/// Largest violation of a point against a model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Violation {
    pub amount: f64,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub scheme: SchemeId,
    /// Big-M of the reconfiguration rows, when present.
    pub big_m: Option<f64>,
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<f64>,
    var_lookup: BTreeMap<(VarKind, u32, usize), usize>,
    tag_lookup: BTreeMap<Tag, usize>,
}

impl MilpModel {
    pub fn new(scheme: SchemeId) -> Self {
        Self {
            scheme,
            big_m: None,
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            var_lookup: BTreeMap::new(),
            tag_lookup: BTreeMap::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        kind: VarKind,
        entity: u32,
        hour: usize,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> Result<usize, ModelError> {
        let index = self.variables.len();
        let reference = VarRef {
            kind,
            entity,
            hour,
            index,
        };
        if self.var_lookup.insert((kind, entity, hour), index).is_some() {
            return Err(ModelError::DuplicateVariable(reference.name()));
        }
        self.variables.push(Variable {
            reference,
            lower,
            upper,
            integer,
        });
        self.objective.push(0.0);
        Ok(index)
    }

    pub fn add_binary(&mut self, kind: VarKind, entity: u32, hour: usize) -> Result<usize, ModelError> {
        self.add_variable(kind, entity, hour, 0.0, 1.0, true)
    }

    pub fn add_constraint(
        &mut self,
        tag: Tag,
        equation: u8,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, ModelError> {
        let mut seen = BTreeSet::new();
        for &(j, _) in &terms {
            if j >= self.variables.len() {
                return Err(ModelError::BadColumn(j));
            }
            if !seen.insert(j) {
                return Err(ModelError::DuplicateTerm {
                    tag: alloc::format!("{tag}"),
                    column: j,
                });
            }
        }
        let row = self.constraints.len();
        if self.tag_lookup.insert(tag, row).is_some() {
            return Err(ModelError::DuplicateTag(alloc::format!("{tag}")));
        }
        self.constraints.push(LinearConstraint {
            terms,
            sense,
            rhs,
            tag,
            equation,
        });
        Ok(row)
    }

    /// Adds `coefficient` to the objective coefficient of column `j`.
    pub fn add_objective_term(&mut self, j: usize, coefficient: f64) -> Result<(), ModelError> {
        let c = self.objective.get_mut(j).ok_or(ModelError::BadColumn(j))?;
        *c += coefficient;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// Dense objective coefficients, one per column.
    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    /// Non-zero objective terms.
    pub fn objective_terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| (j, *c))
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn row_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_index(&self, kind: VarKind, entity: u32, hour: usize) -> Option<usize> {
        self.var_lookup.get(&(kind, entity, hour)).copied()
    }

    pub fn require_var(&self, kind: VarKind, entity: u32, hour: usize) -> Result<usize, ModelError> {
        self.var_index(kind, entity, hour).ok_or_else(|| {
            ModelError::MissingVariable(
                VarRef {
                    kind,
                    entity,
                    hour,
                    index: 0,
                }
                .name(),
            )
        })
    }

    pub fn row_index(&self, tag: &Tag) -> Option<usize> {
        self.tag_lookup.get(tag).copied()
    }

    pub fn constraint(&self, tag: &Tag) -> Option<&LinearConstraint> {
        self.row_index(tag).map(|i| &self.constraints[i])
    }

    pub fn rows_in(&self, family: Family) -> impl Iterator<Item = &LinearConstraint> + '_ {
        self.constraints.iter().filter(move |c| c.tag.family == family)
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integer)
    }

    /// Group numbers present in the model: the objective, integrality
    /// declarations and every row.
    pub fn equations(&self) -> BTreeSet<u8> {
        let mut set = BTreeSet::new();
        set.insert(1);
        for v in &self.variables {
            if !v.integer {
                continue;
            }
            match v.reference.kind {
                VarKind::Commitment => {
                    set.insert(2);
                }
                VarKind::Startup => {
                    set.insert(3);
                }
                VarKind::InService => {
                    set.insert(20);
                }
                _ => {}
            }
        }
        set.extend(self.constraints.iter().map(|c| c.equation).filter(|e| *e != 0));
        set
    }

    fn check_len(&self, values: &[f64]) -> Result<(), ModelError> {
        if values.len() == self.variables.len() {
            Ok(())
        } else {
            Err(ModelError::ValueLength {
                expected: self.variables.len(),
                found: values.len(),
            })
        }
    }

    pub fn objective_value(&self, values: &[f64]) -> Result<f64, ModelError> {
        self.check_len(values)?;
        Ok(self.objective.iter().zip(values).map(|(c, x)| c * x).sum())
    }

    /// Worst violation over bounds, integrality and rows.
    pub fn max_violation(&self, values: &[f64]) -> Result<Violation, ModelError> {
        self.check_len(values)?;
        let mut worst = Violation::default();
        for (j, v) in self.variables.iter().enumerate() {
            let x = values[j];
            let mut amount = (v.lower - x).max(x - v.upper).max(0.0);
            if v.integer {
                amount = amount.max((x - round_half_up(x)).abs());
            }
            if amount > worst.amount {
                worst = Violation {
                    amount,
                    row: None,
                    column: Some(j),
                };
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let amount = c.violation(values);
            if amount > worst.amount {
                worst = Violation {
                    amount,
                    row: Some(i),
                    column: None,
                };
            }
        }
        Ok(worst)
    }

    /// Replaces the bounds of column `j`.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> Result<(), ModelError> {
        let v = self.variables.get_mut(j).ok_or(ModelError::BadColumn(j))?;
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    /// The continuous model obtained by pinning every integer column to its
    /// rounded value in `values`.
    pub fn pinned(&self, values: &[f64], integrality_tol: f64) -> Result<MilpModel, ModelError> {
        self.check_len(values)?;
        let mut lp = self.clone();
        for (v, &x) in lp.variables.iter_mut().zip(values) {
            if !v.integer {
                continue;
            }
            let r = round_half_up(x);
            if (x - r).abs() > integrality_tol {
                return Err(ModelError::NotIntegral {
                    name: v.reference.name(),
                    value: x,
                });
            }
            v.lower = r;
            v.upper = r;
            v.integer = false;
        }
        Ok(lp)
    }
}

/// Nearest integer, ties away from zero for positive values.
pub(crate) fn round_half_up(x: f64) -> f64 {
    let t = x as i64 as f64;
    let frac = x - t;
    if frac >= 0.5 {
        t + 1.0
    } else if frac <= -0.5 {
        t - 1.0
    } else {
        t
    }
}
