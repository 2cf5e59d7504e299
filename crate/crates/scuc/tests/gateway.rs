mod common;

use std::path::PathBuf;

use common::*;
use scuc::gateway::*;
use scuc_core::formulation::{build, FormulationConfig, SchemeId};
use scuc_core::grid::{BusId, Case};
use scuc_core::metrics::compute_lmp;
use scuc_core::model::{Family, MilpModel, Sense, Tag, VarKind};
use scuc_core::SolveStatus;

fn cfg() -> SolverConfig {
    SolverConfig { time_limit_s: 60.0, ..SolverConfig::default() }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scuc-gateway-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn model(case: &Case, scheme: SchemeId) -> MilpModel {
    build(case, scheme, &FormulationConfig::default()).unwrap()
}

fn single_unit() -> Case {
    let mut c = empty_case(1, 1);
    add_gen(&mut c, 1, 20.0, 100.0, 20.0, 100.0, 500.0);
    set_load_shape(&mut c, &[(1, 80.0)], &[1.0]);
    c
}

/// Cheap unit at bus 1, expensive at bus 2, one 100 MW line, 150 MW at bus 2.
fn congested_two_bus(load_b: f64) -> Case {
    let mut c = empty_case(2, 1);
    add_line(&mut c, 1, 2, 0.1, 100.0);
    add_gen(&mut c, 1, 0.0, 300.0, 20.0, 0.0, 0.0);
    add_gen(&mut c, 2, 0.0, 300.0, 50.0, 0.0, 0.0);
    set_load_shape(&mut c, &[(2, load_b)], &[1.0]);
    c
}

/// Three buses in a loop, two units, two hours, one binding line.
fn three_bus() -> Case {
    let mut c = empty_case(3, 2);
    add_line(&mut c, 1, 2, 0.1, 200.0);
    add_line(&mut c, 2, 3, 0.1, 200.0);
    add_line(&mut c, 1, 3, 0.1, 60.0);
    add_gen(&mut c, 1, 30.0, 250.0, 18.0, 300.0, 900.0);
    add_gen(&mut c, 3, 10.0, 120.0, 35.0, 60.0, 100.0);
    set_load_shape(&mut c, &[(2, 60.0), (3, 110.0)], &[0.6, 1.0]);
    c
}

#[test]
fn single_feasible_commitment() {
    let m = model(&single_unit(), SchemeId::Scuc);
    let s = solve_mip(&m, &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective - (20.0 * 80.0 + 100.0 + 500.0)).abs() < 1e-6, "{}", s.objective);
}

#[test]
fn zero_load_commits_nothing() {
    let mut c = three_bus();
    c.load.hourly_fraction = vec![0.0, 0.0];
    let m = model(&c, SchemeId::Scuc);
    let s = solve_mip(&m, &cfg()).unwrap();
    assert_eq!(s.objective, 0.0);
    for g in &c.generators {
        for t in 0..2 {
            assert_eq!(s.value(&m, VarKind::Commitment, g.id.0, t), Some(0.0));
        }
    }
}

#[test]
fn uncongested_marginal_unit_sets_the_dual() {
    let mut c = empty_case(1, 2);
    add_gen(&mut c, 1, 0.0, 100.0, 20.0, 0.0, 0.0);
    add_gen(&mut c, 1, 0.0, 100.0, 30.0, 0.0, 0.0);
    set_load_shape(&mut c, &[(1, 80.0)], &[0.75, 1.0]);
    let m = model(&c, SchemeId::Scuc);
    let mip = solve_mip(&m, &cfg()).unwrap();
    let lp = resolve_lp_fixed(&m, &mip, &cfg()).unwrap();
    for t in 0..2 {
        let d = lp.dual(&Tag::balance(1, t)).unwrap();
        assert!((d - 20.0).abs() < 1e-7, "hour {t}: {d}");
    }
}

#[test]
fn pinning_an_optimum_keeps_the_objective() {
    let m = model(&three_bus(), SchemeId::Scuc);
    let mip = solve_mip(&m, &cfg()).unwrap();
    let lp = resolve_lp_fixed(&m, &mip, &cfg()).unwrap();
    assert!(rel_diff(lp.objective, mip.objective) < 1e-6, "{} vs {}", lp.objective, mip.objective);
}

#[test]
fn congested_two_bus_prices() {
    let c = congested_two_bus(150.0);
    let m = model(&c, SchemeId::Scuc);
    let mip = solve_mip(&m, &cfg()).unwrap();
    let lp = resolve_lp_fixed(&m, &mip, &cfg()).unwrap();
    let lmp = compute_lmp(&lp, &c).unwrap();
    assert!((lmp.get(0, 0) - 20.0).abs() < 1e-7, "{}", lmp.get(0, 0));
    assert!((lmp.get(1, 0) - 50.0).abs() < 1e-7, "{}", lmp.get(1, 0));
}

#[test]
fn dual_matches_finite_difference() {
    let base = congested_two_bus(150.0);
    let m = model(&base, SchemeId::Scuc);
    let mip = solve_mip(&m, &cfg()).unwrap();
    let lp = resolve_lp_fixed(&m, &mip, &cfg()).unwrap();
    let bumped = congested_two_bus(151.0);
    let m2 = model(&bumped, SchemeId::Scuc);
    let lp2 = resolve_lp_fixed(&m2, &mip, &cfg()).unwrap();
    let reported = lp.dual(&Tag::balance(2, 0)).unwrap();
    let observed = lp2.objective - lp.objective;
    assert!((observed - reported).abs() <= 0.01 * reported.abs(), "{observed} vs {reported}");
}

#[test]
fn slack_inequalities_have_zero_duals() {
    let m = model(&three_bus(), SchemeId::Scuc);
    let mip = solve_mip(&m, &cfg()).unwrap();
    let lp = resolve_lp_fixed(&m, &mip, &cfg()).unwrap();
    for c in m.constraints().iter().filter(|c| c.sense != Sense::Eq) {
        let slack = (c.rhs - c.activity(&lp.values)).abs();
        if slack > 1e-5 {
            let d = lp.dual(&c.tag).unwrap();
            assert!(d.abs() < 1e-7, "{} slack {slack} dual {d}", c.tag);
        }
    }
    assert_eq!(lp.duals.len(), m.row_count());
}

#[test]
fn solutions_satisfy_the_model() {
    let c = cfg();
    for scheme in [SchemeId::Scuc, SchemeId::ScucNr] {
        let m = model(&three_bus(), scheme);
        let s = solve_mip(&m, &c).unwrap();
        let v = m.max_violation(&s.values).unwrap();
        assert!(v.amount < c.feasibility_tol, "{scheme}: {v:?}");
        assert!(rel_diff(m.objective_value(&s.values).unwrap(), s.objective) < 1e-6);
        let lp = resolve_lp_fixed(&m, &s, &c).unwrap();
        assert!(lp.objective >= s.objective - s.gap * s.objective.abs() - 1e-6);
        assert!(lp.objective <= s.objective * (1.0 + 1e-6) + 1e-6);
    }
}

#[test]
fn infeasible_is_a_status() {
    let mut c = single_unit();
    c.load.bus_peak_mw[0] = 500.0;
    let s = solve_mip(&model(&c, SchemeId::Scuc), &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
    assert!(!s.has_incumbent());
}

#[test]
fn infeasible_pinning_is_reported_distinctly() {
    let m = model(&single_unit(), SchemeId::Scuc);
    let mut s = solve_mip(&m, &cfg()).unwrap();
    let u = m.var_index(VarKind::Commitment, 1, 0).unwrap();
    s.values[u] = 0.0;
    let err = resolve_lp_fixed(&m, &s, &cfg()).unwrap_err();
    assert!(matches!(err, GatewayError::FixedLpInfeasible(_)), "{err}");
}

#[test]
fn backends_agree_on_micro_cases() {
    let exact = SolverConfig { mip_gap: 1e-9, ..cfg() };
    let micro = SolverConfig { backend: "microlp".into(), ..exact.clone() };
    let mut cases = vec![single_unit(), three_bus(), congested_two_bus(150.0)];
    let mut loop_case = three_bus();
    loop_case.load.hourly_fraction = vec![0.3, 0.9];
    cases.push(loop_case);
    for c in &cases {
        for scheme in [SchemeId::Scuc, SchemeId::ScucNr] {
            let m = model(c, scheme);
            let a = solve_mip(&m, &exact).unwrap();
            let b = solve_mip(&m, &micro).unwrap();
            assert!(rel_diff(a.objective, b.objective) < 1e-6, "{scheme}: {} vs {}", a.objective, b.objective);
        }
    }
}

#[test]
fn microlp_has_no_duals() {
    let micro = SolverConfig { backend: "microlp".into(), ..cfg() };
    let m = model(&single_unit(), SchemeId::Scuc);
    let s = solve_mip(&m, &micro).unwrap();
    assert!(matches!(resolve_lp_fixed(&m, &s, &micro), Err(GatewayError::NoDuals("microlp"))));
}

#[test]
fn config_is_checked() {
    let bad = SolverConfig { mip_gap: 0.0, ..cfg() };
    assert!(matches!(bad.validate(), Err(GatewayError::Config(_))));
    let bad = SolverConfig { backend: "cplex".into(), ..cfg() };
    let m = model(&single_unit(), SchemeId::Scuc);
    assert!(matches!(solve_mip(&m, &bad), Err(GatewayError::UnknownBackend(_))));
}

#[test]
fn exported_files_resolve_to_the_same_objective() {
    let dir = scratch("roundtrip");
    let mut c = three_bus();
    add_storage(&mut c, 2, 100.0, 40.0, 50.0);
    for scheme in [SchemeId::Scuc, SchemeId::ScucBess, SchemeId::ScucNr] {
        let m = model(&c, scheme);
        let direct = solve_mip(&m, &cfg()).unwrap();
        for format in [ExportFormat::Mps, ExportFormat::Lp] {
            let path = dir.join(format!("{}.{}", scheme.name(), format.extension()));
            export_model(&m, &path, format).unwrap();
            let (status, objective) = solve_model_file(&path, &cfg()).unwrap();
            assert_eq!(status, SolveStatus::Optimal);
            assert!(rel_diff(objective, direct.objective) < 1e-6, "{scheme} {format:?}: {objective} vs {}", direct.objective);
        }
    }
}

#[test]
fn exported_rows_are_named_and_counted() {
    let mut m = MilpModel::new(SchemeId::Scuc);
    let p = m.add_variable(VarKind::Output, 1, 0, 0.0, 100.0, false).unwrap();
    for t in 0..10 {
        m.add_constraint(Tag::new(Family::OutputMax, 1, t), 6, vec![(p, 1.0)], Sense::Le, 50.0 + t as f64).unwrap();
    }
    let path = scratch("rows").join("ten.mps");
    export_model(&m, &path, ExportFormat::Mps).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .skip_while(|l| *l != "ROWS")
        .skip(1)
        .take_while(|l| l.starts_with(' '))
        .filter(|l| !l.trim_start().starts_with('N'))
        .collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.contains("pmax_g1_t")));
}

#[test]
fn empty_model_exports_and_reads_back() {
    let dir = scratch("empty");
    let m = MilpModel::new(SchemeId::Scuc);
    for format in [ExportFormat::Mps, ExportFormat::Lp] {
        let path = dir.join(format!("empty.{}", format.extension()));
        export_model(&m, &path, format).unwrap();
        let (status, objective) = solve_model_file(&path, &cfg()).unwrap();
        assert_eq!(status, SolveStatus::Optimal);
        assert_eq!(objective, 0.0);
    }
}

#[test]
fn export_to_missing_directory_fails() {
    let m = model(&single_unit(), SchemeId::Scuc);
    let err = export_model(&m, "/nonexistent-dir/x.mps", ExportFormat::Mps).unwrap_err();
    assert!(matches!(err, GatewayError::Io { .. }));
}

#[test]
fn reference_bus_is_respected() {
    let mut c = congested_two_bus(150.0);
    c.meta.reference_bus = BusId(2);
    let m = model(&c, SchemeId::Scuc);
    let s = solve_mip(&m, &cfg()).unwrap();
    assert_eq!(s.value(&m, VarKind::Angle, 2, 0), Some(0.0));
}
