//! Construction of the decarbonized 24-bus study case from the bundled
//! RTS-79 base data: thermal units at the coal buses are removed, solar is
//! added at buses 14-16, the daily peak factor is applied and storage is
//! placed at the two ends of the target branch.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{
    BranchId, BusId, Case, CaseError, SolarId, SolarPlant, StorageId, StorageUnit, VtId, VtPair,
};

/// Total solar nameplate added to the study case, MW.
pub const STUDY_SOLAR_TOTAL_MW: f64 = 1110.0;

/// Solar nameplate per bus, MW. Two thirds of the total sit at bus 14,
/// the 230 kV end of branch 19; with an even split the midday export binds
/// branch 29 instead of branch 19.
pub const DEFAULT_SOLAR_SPLIT: [(u32, f64); 3] = [(14, 740.0), (15, 185.0), (16, 185.0)];

/// Default solar availability: a symmetric bell that is non-zero from 6 a.m.
/// to 7 p.m. and peaks at noon. Index `t` is the hour starting at `t:00`.
pub const DEFAULT_SOLAR_PROFILE: [f64; 24] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, // 00-05
    0.05, 0.20, 0.40, 0.62, 0.82, 0.96, // 06-11
    1.00, 0.96, 0.82, 0.62, 0.40, 0.20, // 12-17
    0.05, 0.0, 0.0, 0.0, 0.0, 0.0, // 18-23
];

#[derive(Clone, Debug, PartialEq)]
pub struct SolarSite {
    pub bus: BusId,
    pub capacity_mw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StorageSpec {
    /// One unit is placed at each bus, in order.
    pub buses: Vec<BusId>,
    pub energy_mwh: f64,
    pub power_mw: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    /// Initial energy as a fraction of `energy_mwh`.
    pub initial_fraction: f64,
    /// End the day with at least the initial energy. Without it every unit
    /// can sell its opening charge for free, a saving that grows linearly
    /// with size.
    pub cyclic: bool,
}

impl Default for StorageSpec {
    fn default() -> Self {
        Self {
            buses: vec![BusId(11), BusId(14)],
            energy_mwh: 800.0,
            power_mw: 200.0,
            eta_charge: 0.95,
            eta_discharge: 0.95,
            initial_fraction: 0.5,
            cyclic: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedRtsConfig {
    /// Every generator at these buses is dropped.
    pub removed_generator_buses: Vec<BusId>,
    pub solar_sites: Vec<SolarSite>,
    pub solar_profile: Vec<f64>,
    pub daily_peak_factor: f64,
    /// Replaces the base hourly load shape when set.
    pub hourly_fraction: Option<Vec<f64>>,
    /// `None` places no storage at all.
    pub storage: Option<StorageSpec>,
    /// Branch spanned by the virtual-transmission pair; `None` skips the pair.
    pub vt_branch: Option<BranchId>,
    /// Enforce the published solar total.
    pub strict_paper: bool,
}

impl Default for ModifiedRtsConfig {
    fn default() -> Self {
        Self {
            removed_generator_buses: vec![BusId(2), BusId(15), BusId(16), BusId(23)],
            solar_sites: DEFAULT_SOLAR_SPLIT
                .into_iter()
                .map(|(b, mw)| SolarSite {
                    bus: BusId(b),
                    capacity_mw: mw,
                })
                .collect(),
            solar_profile: DEFAULT_SOLAR_PROFILE.to_vec(),
            daily_peak_factor: 0.80,
            hourly_fraction: None,
            storage: Some(StorageSpec::default()),
            vt_branch: Some(BranchId(19)),
            strict_paper: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RtsError {
    #[error("solar total is {found} MW; strict mode requires {STUDY_SOLAR_TOTAL_MW} MW")]
    SolarTotal { found: f64 },
    #[error("storage bus {bus} is not an endpoint of branch {branch}")]
    StorageNotAtEndpoint { bus: BusId, branch: BranchId },
    #[error("a virtual-transmission pair needs exactly two storage buses, got {0}")]
    PairSize(usize),
    #[error("virtual-transmission pair requested without storage")]
    PairWithoutStorage,
    #[error(transparent)]
    Case(#[from] CaseError),
}

/// Builds the study case from validated base data.
pub fn build_modified_rts_case(base: &Case, cfg: &ModifiedRtsConfig) -> Result<Case, RtsError> {
    base.validate()?;
    let total: f64 = cfg.solar_sites.iter().map(|s| s.capacity_mw).sum();
    if cfg.strict_paper && (total - STUDY_SOLAR_TOTAL_MW).abs() > 1e-9 {
        return Err(RtsError::SolarTotal { found: total });
    }

    let mut case = base.clone();
    case.generators
        .retain(|g| !cfg.removed_generator_buses.contains(&g.bus));

    case.solar = cfg
        .solar_sites
        .iter()
        .enumerate()
        .map(|(i, site)| SolarPlant {
            id: SolarId(i as u32 + 1),
            bus: site.bus,
            capacity_mw: site.capacity_mw,
            profile: cfg.solar_profile.clone(),
        })
        .collect();

    case.load.daily_peak_factor = cfg.daily_peak_factor;
    if let Some(shape) = &cfg.hourly_fraction {
        case.load.hourly_fraction = shape.clone();
    }

    case.storage.clear();
    case.vt_pairs.clear();
    if let Some(spec) = &cfg.storage {
        case.storage = spec
            .buses
            .iter()
            .enumerate()
            .map(|(i, &bus)| StorageUnit {
                id: StorageId(i as u32 + 1),
                bus,
                e_min_mwh: 0.0,
                e_max_mwh: spec.energy_mwh,
                p_charge_max_mw: spec.power_mw,
                p_discharge_max_mw: spec.power_mw,
                eta_charge: spec.eta_charge,
                eta_discharge: spec.eta_discharge,
                e_initial_mwh: spec.initial_fraction * spec.energy_mwh,
                cyclic: spec.cyclic,
            })
            .collect();
    }

    if let Some(branch_id) = cfg.vt_branch {
        let spec = cfg.storage.as_ref().ok_or(RtsError::PairWithoutStorage)?;
        let branch = case
            .branch(branch_id)
            .ok_or(CaseError::UnknownBranch(branch_id))?;
        for &bus in &spec.buses {
            if bus != branch.from_bus && bus != branch.to_bus {
                return Err(RtsError::StorageNotAtEndpoint {
                    bus,
                    branch: branch_id,
                });
            }
        }
        if spec.buses.len() != 2 {
            return Err(RtsError::PairSize(spec.buses.len()));
        }
        case.vt_pairs.push(VtPair {
            id: VtId(1),
            storage_a: StorageId(1),
            storage_b: StorageId(2),
            spanned_branch: branch_id,
        });
    }

    case.meta.name = "ieee24_modified".into();
    case.validate()?;
    Ok(case)
}
