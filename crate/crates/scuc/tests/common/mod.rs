#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use scuc_core::grid::*;

/// `n` buses, no branches or units, zero load, `hours` hours.
pub fn empty_case(n: u32, hours: usize) -> Case {
    Case {
        buses: (1..=n)
            .map(|i| Bus { id: BusId(i), name: format!("b{i}"), voltage_kv: 230.0 })
            .collect(),
        branches: vec![],
        generators: vec![],
        solar: vec![],
        storage: vec![],
        vt_pairs: vec![],
        load: LoadModel {
            bus_peak_mw: vec![0.0; n as usize],
            hourly_fraction: vec![1.0; hours],
            daily_peak_factor: 1.0,
        },
        meta: CaseMeta {
            name: "micro".into(),
            horizon_hours: hours,
            interval_hours: 1.0,
            reference_bus: BusId(1),
            base_mva: 100.0,
            notes: vec![],
        },
    }
}

pub fn add_line(c: &mut Case, from: u32, to: u32, x: f64, rating: f64) -> BranchId {
    let id = BranchId(c.branches.len() as u32 + 1);
    c.branches.push(Branch {
        id,
        from_bus: BusId(from),
        to_bus: BusId(to),
        reactance: x,
        rating_mw: rating,
        switchable: true,
        parallel_of: None,
    });
    id
}

/// Generator with energy, no-load and start-up costs; initially off.
pub fn add_gen(c: &mut Case, bus: u32, p_min: f64, p_max: f64, cost: f64, noload: f64, startup: f64) -> GeneratorId {
    let id = GeneratorId(c.generators.len() as u32 + 1);
    c.generators.push(Generator {
        id,
        bus: BusId(bus),
        unit_type: String::new(),
        p_min_mw: p_min,
        p_max_mw: p_max,
        cost_energy: cost,
        cost_noload: noload,
        cost_startup: startup,
        ramp_hourly_mw: None,
        initial_on: false,
        initial_output_mw: 0.0,
    });
    id
}

pub fn add_storage(c: &mut Case, bus: u32, energy: f64, power: f64, initial: f64) -> StorageId {
    let id = StorageId(c.storage.len() as u32 + 1);
    c.storage.push(StorageUnit {
        id,
        bus: BusId(bus),
        e_min_mwh: 0.0,
        e_max_mwh: energy,
        p_charge_max_mw: power,
        p_discharge_max_mw: power,
        eta_charge: 0.9,
        eta_discharge: 0.9,
        e_initial_mwh: initial,
        cyclic: false,
    });
    id
}

pub fn add_vt_pair(c: &mut Case, a: StorageId, b: StorageId, branch: BranchId) {
    let id = VtId(c.vt_pairs.len() as u32 + 1);
    c.vt_pairs.push(VtPair { id, storage_a: a, storage_b: b, spanned_branch: branch });
}

/// Sets bus peaks and the hourly shape shared by all buses.
pub fn set_load_shape(c: &mut Case, peaks: &[(u32, f64)], fractions: &[f64]) {
    for &(bus, peak) in peaks {
        c.load.bus_peak_mw[bus as usize - 1] = peak;
    }
    c.load.hourly_fraction = fractions.to_vec();
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
