use std::collections::BTreeSet;

use proptest::prelude::*;
use scuc_core::formulation::{build, FormulationConfig, SchemeId};
use scuc_core::grid::*;
use scuc_core::model::{Family, MilpModel, VarKind};

/// Four-bus ring with a radial spur, two storage units forming a pair
/// across branch 2, and one plant. Branch 5 (the spur) is not switchable.
fn ring(hours: usize) -> Case {
    let bus = |i: u32| Bus { id: BusId(i), name: format!("b{i}"), voltage_kv: 138.0 };
    let line = |id: u32, f: u32, t: u32, switchable: bool| Branch {
        id: BranchId(id),
        from_bus: BusId(f),
        to_bus: BusId(t),
        reactance: 0.05 * id as f64,
        rating_mw: 120.0,
        switchable,
        parallel_of: None,
    };
    let gen = |id: u32, at: u32| Generator {
        id: GeneratorId(id),
        bus: BusId(at),
        unit_type: "steam".into(),
        p_min_mw: 10.0,
        p_max_mw: 200.0,
        cost_energy: 15.0 + id as f64,
        cost_noload: 50.0,
        cost_startup: 200.0,
        ramp_hourly_mw: Some(80.0),
        initial_on: false,
        initial_output_mw: 0.0,
    };
    let store = |id: u32, at: u32| StorageUnit {
        id: StorageId(id),
        bus: BusId(at),
        e_min_mwh: 0.0,
        e_max_mwh: 80.0,
        p_charge_max_mw: 20.0,
        p_discharge_max_mw: 20.0,
        eta_charge: 0.95,
        eta_discharge: 0.95,
        e_initial_mwh: 40.0,
        cyclic: false,
    };
    Case {
        buses: (1..=5).map(bus).collect(),
        branches: vec![
            line(1, 1, 2, true),
            line(2, 2, 3, true),
            line(3, 3, 4, true),
            line(4, 4, 1, true),
            line(5, 4, 5, false),
        ],
        generators: vec![gen(1, 1), gen(2, 5)],
        solar: vec![SolarPlant {
            id: SolarId(1),
            bus: BusId(3),
            capacity_mw: 30.0,
            profile: (0..hours).map(|t| (t % 2) as f64).collect(),
        }],
        storage: vec![StorageUnit { cyclic: true, ..store(1, 2) }, store(2, 3)],
        vt_pairs: vec![VtPair {
            id: VtId(1),
            storage_a: StorageId(1),
            storage_b: StorageId(2),
            spanned_branch: BranchId(2),
        }],
        load: LoadModel {
            bus_peak_mw: vec![0.0, 60.0, 90.0, 40.0, 0.0],
            hourly_fraction: (0..hours).map(|t| 0.6 + 0.1 * (t % 4) as f64).collect(),
            daily_peak_factor: 1.0,
        },
        meta: CaseMeta {
            name: "ring".into(),
            horizon_hours: hours,
            interval_hours: 1.0,
            reference_bus: BusId(1),
            base_mva: 100.0,
            notes: vec![],
        },
    }
}

fn scheme_case(scheme: SchemeId, hours: usize) -> Case {
    let c = ring(hours);
    if scheme == SchemeId::ScucPt {
        c.add_parallel_line(BranchId(2)).unwrap()
    } else {
        c
    }
}

fn range(a: u8, b: u8) -> impl Iterator<Item = u8> {
    a..=b
}

/// The equation list of each scheme, written out independently of the
/// builder's own scheme flags.
fn expected_equations(scheme: SchemeId) -> BTreeSet<u8> {
    match scheme {
        SchemeId::Scuc | SchemeId::ScucPt => range(1, 11).collect(),
        SchemeId::ScucBess => range(1, 10).chain(range(12, 17)).collect(),
        SchemeId::ScucVt => range(1, 10).chain(range(12, 19)).collect(),
        SchemeId::ScucNr => range(1, 11).chain(range(20, 23)).collect(),
        SchemeId::ScucBessNr => range(1, 10).chain(range(12, 17)).chain(range(20, 23)).collect(),
        SchemeId::ScucVtNr => range(1, 10).chain(range(12, 23)).collect(),
    }
}

fn build_default(scheme: SchemeId, hours: usize) -> MilpModel {
    build(&scheme_case(scheme, hours), scheme, &FormulationConfig::default()).unwrap()
}

#[test]
fn equation_census_matches_scheme_table() {
    for scheme in SchemeId::ALL {
        let m = build_default(scheme, 3);
        assert_eq!(m.equations(), expected_equations(scheme), "{scheme}");
    }
}

#[test]
fn balance_rows_cover_every_bus_and_hour() {
    for scheme in SchemeId::ALL {
        let m = build_default(scheme, 4);
        let tags: BTreeSet<_> = m.rows_in(Family::Balance).map(|c| (c.tag.entity, c.tag.hour)).collect();
        assert_eq!(m.rows_in(Family::Balance).count(), 5 * 4, "{scheme}");
        assert_eq!(tags.len(), 5 * 4);
    }
}

#[test]
fn pair_rows_once_per_hour() {
    let m = build_default(SchemeId::ScucVt, 6);
    assert_eq!(m.rows_in(Family::VtCharge).count(), 6);
    assert_eq!(m.rows_in(Family::VtDischarge).count(), 6);
    for row in m.rows_in(Family::VtCharge) {
        assert_eq!(row.rhs, 1.0);
        let kinds: Vec<_> = row.terms.iter().map(|&(j, _)| m.variables()[j].reference.kind).collect();
        assert_eq!(kinds, [VarKind::ChargeMode, VarKind::ChargeMode]);
    }
}

#[test]
fn switch_budget_spans_switchable_branches() {
    let m = build_default(SchemeId::ScucNr, 5);
    assert_eq!(m.rows_in(Family::SwitchBudget).count(), 5);
    for row in m.rows_in(Family::SwitchBudget) {
        // -sum J <= 1 - |S| over the four ring branches.
        assert_eq!(row.terms.len(), 4);
        assert_eq!(row.rhs, -3.0);
        let entities: BTreeSet<_> = row.terms.iter().map(|&(j, _)| m.variables()[j].reference.entity).collect();
        assert_eq!(entities, BTreeSet::from([1, 2, 3, 4]));
    }
    // The spur keeps the plain flow rows.
    assert_eq!(m.rows_in(Family::FlowDefinition).count(), 5);
    assert!(m.rows_in(Family::FlowDefinition).all(|r| r.tag.entity == Some(5)));
    assert!(m.var_index(VarKind::InService, 5, 0).is_none());
}

#[test]
fn binaries_are_zero_one() {
    for scheme in SchemeId::ALL {
        let m = build_default(scheme, 2);
        for v in m.variables().iter().filter(|v| v.integer) {
            assert_eq!((v.lower, v.upper), (0.0, 1.0), "{}", v.reference.name());
        }
    }
}

#[test]
fn parallel_line_scheme_sees_both_elements() {
    let m = build_default(SchemeId::ScucPt, 2);
    assert_eq!(m.rows_in(Family::FlowDefinition).count(), 6 * 2);
    let base = build_default(SchemeId::Scuc, 2);
    assert_eq!(m.var_count(), base.var_count() + 2);
}

#[test]
fn storage_feasible_set_nests() {
    // The pair scheme is the storage scheme plus rows; columns agree.
    let bess = build_default(SchemeId::ScucBess, 3);
    let vt = build_default(SchemeId::ScucVt, 3);
    assert_eq!(bess.variables(), vt.variables());
    assert_eq!(&vt.constraints()[..bess.row_count()], bess.constraints());
}

proptest! {
    #[test]
    fn building_is_deterministic(hours in 1usize..6, pick in 0usize..7) {
        let scheme = SchemeId::ALL[pick];
        let a = build_default(scheme, hours);
        let b = build_default(scheme, hours);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn columns_dense_and_tags_unique(hours in 1usize..5, pick in 0usize..7) {
        let m = build_default(SchemeId::ALL[pick], hours);
        for (j, v) in m.variables().iter().enumerate() {
            prop_assert_eq!(v.reference.index, j);
        }
        let tags: BTreeSet<_> = m.constraints().iter().map(|c| c.tag).collect();
        prop_assert_eq!(tags.len(), m.row_count());
        for c in m.constraints() {
            let cols: BTreeSet<_> = c.terms.iter().map(|t| t.0).collect();
            prop_assert_eq!(cols.len(), c.terms.len());
            prop_assert!(c.terms.iter().all(|t| t.0 < m.var_count()));
        }
    }
}
