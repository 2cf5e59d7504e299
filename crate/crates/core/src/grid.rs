//! Grid data model: buses, branches, generators, solar plants, storage,
//! virtual-transmission pairs and the load model.
//!
//! A [`Case`] is validated once on construction and never mutated
//! afterwards; scheme runs share it by reference.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

macro_rules! entity_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

entity_id!(
    /// Bus number. Bus ids are dense: `1..=buses.len()` in order.
    BusId
);
entity_id!(BranchId);
entity_id!(GeneratorId);
entity_id!(SolarId);
entity_id!(StorageId);
entity_id!(VtId);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub name: String,
    pub voltage_kv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: BranchId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series reactance in per-unit on the system base.
    pub reactance: f64,
    pub rating_mw: f64,
    /// Whether the branch may be opened by network reconfiguration.
    #[serde(default = "default_true")]
    pub switchable: bool,
    /// Set on a branch created by [`Case::add_parallel_line`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel_of: Option<BranchId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: GeneratorId,
    pub bus: BusId,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub unit_type: String,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    /// Linear energy cost, $/MWh.
    pub cost_energy: f64,
    /// No-load cost, $/h.
    pub cost_noload: f64,
    /// Start-up cost, $ per start.
    pub cost_startup: f64,
    /// Hourly ramp limit. Falls back to `p_max_mw` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_hourly_mw: Option<f64>,
    /// Commitment status in the hour before the horizon.
    #[serde(default)]
    pub initial_on: bool,
    /// Output in the hour before the horizon.
    #[serde(default)]
    pub initial_output_mw: f64,
}

impl Generator {
    pub fn ramp_limit(&self) -> f64 {
        self.ramp_hourly_mw.unwrap_or(self.p_max_mw)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolarPlant {
    pub id: SolarId,
    pub bus: BusId,
    pub capacity_mw: f64,
    /// Available fraction of capacity per hour.
    pub profile: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageUnit {
    pub id: StorageId,
    pub bus: BusId,
    pub e_min_mwh: f64,
    pub e_max_mwh: f64,
    pub p_charge_max_mw: f64,
    pub p_discharge_max_mw: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub e_initial_mwh: f64,
    /// Require the final energy level to be at least the initial one.
    #[serde(default)]
    pub cyclic: bool,
}

/// Two storage units at the ends of one branch operated as a virtual line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VtPair {
    pub id: VtId,
    pub storage_a: StorageId,
    pub storage_b: StorageId,
    pub spanned_branch: BranchId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadModel {
    /// Peak demand per bus, aligned with `Case::buses`.
    pub bus_peak_mw: Vec<f64>,
    /// Hourly load as a fraction of the daily peak.
    pub hourly_fraction: Vec<f64>,
    /// Daily peak as a fraction of the annual bus peaks.
    pub daily_peak_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub name: String,
    pub horizon_hours: usize,
    pub interval_hours: f64,
    pub reference_bus: BusId,
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub solar: Vec<SolarPlant>,
    #[serde(default)]
    pub storage: Vec<StorageUnit>,
    #[serde(default)]
    pub vt_pairs: Vec<VtPair>,
    pub load: LoadModel,
    pub meta: CaseMeta,
}

fn default_true() -> bool {
    true
}

fn default_base_mva() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error("duplicate {entity} id {id}")]
    DuplicateId { entity: &'static str, id: u32 },
    #[error("bus ids must be dense 1..=N: position {position} holds bus {id}")]
    BusIdsNotDense { position: usize, id: BusId },
    #[error("{entity} {id} references unknown bus {bus}")]
    UnknownBus {
        entity: &'static str,
        id: u32,
        bus: BusId,
    },
    #[error("unknown branch {0}")]
    UnknownBranch(BranchId),
    #[error("vt pair {pair} references unknown storage {storage}")]
    UnknownStorage { pair: VtId, storage: StorageId },
    #[error("{entity} {id}: {reason}")]
    Invalid {
        entity: &'static str,
        id: u32,
        reason: String,
    },
    #[error("load model: {0}")]
    InvalidLoad(String),
    #[error("meta: {0}")]
    InvalidMeta(String),
    #[error("network disconnected: bus {0} unreachable from bus 1")]
    Disconnected(BusId),
    #[error("{what} index {index} out of range")]
    OutOfRange { what: &'static str, index: usize },
}

fn invalid(entity: &'static str, id: u32, reason: &str) -> CaseError {
    CaseError::Invalid {
        entity,
        id,
        reason: reason.into(),
    }
}

fn is_fraction(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn check_unique<I: IntoIterator<Item = u32>>(entity: &'static str, ids: I) -> Result<(), CaseError> {
    let mut seen: Vec<u32> = ids.into_iter().collect();
    seen.sort_unstable();
    for w in seen.windows(2) {
        if w[0] == w[1] {
            return Err(CaseError::DuplicateId { entity, id: w[0] });
        }
    }
    Ok(())
}

impl Case {
    /// Checks every structural invariant of the case.
    pub fn validate(&self) -> Result<(), CaseError> {
        self.validate_meta()?;
        self.validate_buses()?;
        self.validate_branches()?;
        self.validate_generators()?;
        self.validate_solar()?;
        self.validate_storage()?;
        self.validate_vt_pairs()?;
        self.validate_load()?;
        self.check_connected()
    }

    fn validate_meta(&self) -> Result<(), CaseError> {
        let m = &self.meta;
        if m.horizon_hours == 0 {
            return Err(CaseError::InvalidMeta("horizon_hours must be positive".into()));
        }
        if !(m.interval_hours > 0.0 && m.interval_hours.is_finite()) {
            return Err(CaseError::InvalidMeta("interval_hours must be positive".into()));
        }
        if !(m.base_mva > 0.0 && m.base_mva.is_finite()) {
            return Err(CaseError::InvalidMeta("base_mva must be positive".into()));
        }
        if self.bus_index(m.reference_bus).is_none() {
            return Err(CaseError::UnknownBus {
                entity: "reference",
                id: 0,
                bus: m.reference_bus,
            });
        }
        Ok(())
    }

    fn validate_buses(&self) -> Result<(), CaseError> {
        if self.buses.is_empty() {
            return Err(CaseError::InvalidMeta("case has no buses".into()));
        }
        for (position, bus) in self.buses.iter().enumerate() {
            if bus.id.0 as usize != position + 1 {
                return Err(CaseError::BusIdsNotDense {
                    position,
                    id: bus.id,
                });
            }
        }
        Ok(())
    }

    fn require_bus(&self, entity: &'static str, id: u32, bus: BusId) -> Result<(), CaseError> {
        match self.bus_index(bus) {
            Some(_) => Ok(()),
            None => Err(CaseError::UnknownBus { entity, id, bus }),
        }
    }

    fn validate_branches(&self) -> Result<(), CaseError> {
        check_unique("branch", self.branches.iter().map(|b| b.id.0))?;
        for b in &self.branches {
            self.require_bus("branch", b.id.0, b.from_bus)?;
            self.require_bus("branch", b.id.0, b.to_bus)?;
            if b.from_bus == b.to_bus {
                return Err(invalid("branch", b.id.0, "from_bus equals to_bus"));
            }
            if !(b.reactance > 0.0 && b.reactance.is_finite()) {
                return Err(invalid("branch", b.id.0, "reactance must be positive"));
            }
            if !(b.rating_mw > 0.0 && b.rating_mw.is_finite()) {
                return Err(invalid("branch", b.id.0, "rating must be positive"));
            }
        }
        Ok(())
    }

    fn validate_generators(&self) -> Result<(), CaseError> {
        check_unique("generator", self.generators.iter().map(|g| g.id.0))?;
        for g in &self.generators {
            let id = g.id.0;
            self.require_bus("generator", id, g.bus)?;
            if !(g.p_min_mw >= 0.0 && g.p_min_mw <= g.p_max_mw && g.p_max_mw.is_finite()) {
                return Err(invalid("generator", id, "requires 0 <= p_min <= p_max"));
            }
            let costs = [g.cost_energy, g.cost_noload, g.cost_startup];
            if costs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
                return Err(invalid("generator", id, "costs must be non-negative"));
            }
            if !(g.ramp_limit() > 0.0) {
                return Err(invalid("generator", id, "ramp limit must be positive"));
            }
            if g.initial_output_mw < 0.0
                || (!g.initial_on && g.initial_output_mw != 0.0)
                || (g.initial_on && g.initial_output_mw > g.p_max_mw)
            {
                return Err(invalid("generator", id, "initial output inconsistent with status"));
            }
        }
        Ok(())
    }

    fn validate_solar(&self) -> Result<(), CaseError> {
        check_unique("solar", self.solar.iter().map(|s| s.id.0))?;
        for s in &self.solar {
            self.require_bus("solar", s.id.0, s.bus)?;
            if !(s.capacity_mw >= 0.0 && s.capacity_mw.is_finite()) {
                return Err(invalid("solar", s.id.0, "capacity must be non-negative"));
            }
            if s.profile.len() != self.meta.horizon_hours {
                return Err(invalid("solar", s.id.0, "profile length differs from horizon"));
            }
            if !s.profile.iter().all(|f| is_fraction(*f)) {
                return Err(invalid("solar", s.id.0, "profile fractions must lie in [0,1]"));
            }
        }
        Ok(())
    }

    fn validate_storage(&self) -> Result<(), CaseError> {
        check_unique("storage", self.storage.iter().map(|s| s.id.0))?;
        for s in &self.storage {
            let id = s.id.0;
            self.require_bus("storage", id, s.bus)?;
            if !(s.e_min_mwh >= 0.0 && s.e_max_mwh > s.e_min_mwh && s.e_max_mwh.is_finite()) {
                return Err(invalid("storage", id, "requires 0 <= e_min < e_max"));
            }
            if !(s.p_charge_max_mw > 0.0 && s.p_discharge_max_mw > 0.0) {
                return Err(invalid("storage", id, "power ratings must be positive"));
            }
            let eta_ok = |e: f64| e > 0.0 && e <= 1.0;
            if !(eta_ok(s.eta_charge) && eta_ok(s.eta_discharge)) {
                return Err(invalid("storage", id, "efficiencies must lie in (0,1]"));
            }
            if !(s.e_initial_mwh >= s.e_min_mwh && s.e_initial_mwh <= s.e_max_mwh) {
                return Err(invalid("storage", id, "initial energy outside [e_min, e_max]"));
            }
        }
        Ok(())
    }

    fn validate_vt_pairs(&self) -> Result<(), CaseError> {
        check_unique("vt pair", self.vt_pairs.iter().map(|p| p.id.0))?;
        for p in &self.vt_pairs {
            if p.storage_a == p.storage_b {
                return Err(invalid("vt pair", p.id.0, "storage_a equals storage_b"));
            }
            let a = self.storage_unit(p.storage_a).ok_or(CaseError::UnknownStorage {
                pair: p.id,
                storage: p.storage_a,
            })?;
            let b = self.storage_unit(p.storage_b).ok_or(CaseError::UnknownStorage {
                pair: p.id,
                storage: p.storage_b,
            })?;
            let br = self
                .branch(p.spanned_branch)
                .ok_or(CaseError::UnknownBranch(p.spanned_branch))?;
            let forward = a.bus == br.from_bus && b.bus == br.to_bus;
            let backward = a.bus == br.to_bus && b.bus == br.from_bus;
            if !(forward || backward) {
                return Err(invalid(
                    "vt pair",
                    p.id.0,
                    "storage units must sit at the two ends of the spanned branch",
                ));
            }
        }
        Ok(())
    }

    fn validate_load(&self) -> Result<(), CaseError> {
        let l = &self.load;
        if l.bus_peak_mw.len() != self.buses.len() {
            return Err(CaseError::InvalidLoad(alloc::format!(
                "bus_peak_mw has {} entries for {} buses",
                l.bus_peak_mw.len(),
                self.buses.len()
            )));
        }
        if l.hourly_fraction.len() != self.meta.horizon_hours {
            return Err(CaseError::InvalidLoad(alloc::format!(
                "hourly_fraction has {} entries for a {}-hour horizon",
                l.hourly_fraction.len(),
                self.meta.horizon_hours
            )));
        }
        if !l.hourly_fraction.iter().all(|f| is_fraction(*f)) {
            return Err(CaseError::InvalidLoad("hourly fractions must lie in [0,1]".into()));
        }
        if !(l.daily_peak_factor >= 0.0 && l.daily_peak_factor.is_finite()) {
            return Err(CaseError::InvalidLoad("daily_peak_factor must be non-negative".into()));
        }
        if !l.bus_peak_mw.iter().all(|p| *p >= 0.0 && p.is_finite()) {
            return Err(CaseError::InvalidLoad("bus peaks must be non-negative".into()));
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<(), CaseError> {
        let n = self.buses.len();
        let mut adjacency = vec![Vec::new(); n];
        for b in &self.branches {
            let (f, t) = (b.from_bus.0 as usize - 1, b.to_bus.0 as usize - 1);
            adjacency[f].push(t);
            adjacency[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(CaseError::Disconnected(self.buses[i].id)),
            None => Ok(()),
        }
    }

    pub fn horizon(&self) -> usize {
        self.meta.horizon_hours
    }

    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        let i = (id.0 as usize).checked_sub(1)?;
        (i < self.buses.len()).then_some(i)
    }

    pub fn branch(&self, id: BranchId) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn generator(&self, id: GeneratorId) -> Option<&Generator> {
        self.generators.iter().find(|g| g.id == id)
    }

    pub fn storage_unit(&self, id: StorageId) -> Option<&StorageUnit> {
        self.storage.iter().find(|s| s.id == id)
    }

    fn check_hour(&self, t: usize) -> Result<(), CaseError> {
        if t < self.horizon() {
            Ok(())
        } else {
            Err(CaseError::OutOfRange {
                what: "hour",
                index: t,
            })
        }
    }

    /// Native consumer demand at bus `n` in hour `t`, MW.
    pub fn demand(&self, n: BusId, t: usize) -> Result<f64, CaseError> {
        let i = self.bus_index(n).ok_or(CaseError::OutOfRange {
            what: "bus",
            index: n.0 as usize,
        })?;
        self.check_hour(t)?;
        let l = &self.load;
        Ok(l.bus_peak_mw[i] * l.daily_peak_factor * l.hourly_fraction[t])
    }

    /// Fixed solar output at bus `n` in hour `t`, MW.
    pub fn solar_injection(&self, n: BusId, t: usize) -> Result<f64, CaseError> {
        self.bus_index(n).ok_or(CaseError::OutOfRange {
            what: "bus",
            index: n.0 as usize,
        })?;
        self.check_hour(t)?;
        Ok(self
            .solar
            .iter()
            .filter(|s| s.bus == n)
            .map(|s| s.capacity_mw * s.profile[t])
            .sum())
    }

    /// System-wide native demand in hour `t`, MW.
    pub fn total_demand(&self, t: usize) -> Result<f64, CaseError> {
        self.buses.iter().map(|b| self.demand(b.id, t)).sum()
    }

    /// Returns a copy of the case with one more branch duplicating `branch_id`.
    pub fn add_parallel_line(&self, branch_id: BranchId) -> Result<Case, CaseError> {
        let original = self
            .branch(branch_id)
            .ok_or(CaseError::UnknownBranch(branch_id))?
            .clone();
        let next_id = self.branches.iter().map(|b| b.id.0).max().unwrap_or(0) + 1;
        let mut case = self.clone();
        case.branches.push(Branch {
            id: BranchId(next_id),
            parallel_of: Some(branch_id),
            ..original
        });
        Ok(case)
    }
}
