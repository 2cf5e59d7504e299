//! Experiment orchestration: scheme comparison, storage size sweep, flow
//! traces and LMP differences, with CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use scuc_core::formulation::{build, BuildError, FormulationConfig, SchemeId};
use scuc_core::grid::{BranchId, Case, CaseError};
use scuc_core::metrics::{
    compute_lmp, congestion_stats, cost_reduction, lmp_difference, load_payment, storage_profile, CongestionReport,
    LmpMatrix, MetricsError, StorageProfile,
};
use scuc_core::model::{MilpModel, VarKind};
use scuc_core::{LpSolution, MipSolution, SolveStatus};

use crate::gateway::{resolve_lp_fixed, solve_mip, GatewayError, SolverConfig};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("invalid study configuration: {0}")]
    Config(String),
    #[error("{scheme}: {source}")]
    Build { scheme: SchemeId, source: BuildError },
    #[error("{scheme}: {source}")]
    Solve { scheme: SchemeId, source: GatewayError },
    #[error("{scheme}: {source}")]
    Metrics { scheme: SchemeId, source: MetricsError },
    #[error("{scheme} has no solution ({status})")]
    NoSolution { scheme: SchemeId, status: SolveStatus },
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub schemes: Vec<SchemeId>,
    pub solver: SolverConfig,
    /// Overrides the solver time limit for schemes with reconfiguration.
    pub reconfiguration_time_limit_s: Option<f64>,
    pub formulation: FormulationConfig,
    pub out_dir: Option<PathBuf>,
    pub sweep_sizes_mw: Vec<f64>,
    /// Storage energy per MW of power in the sweep, hours.
    pub sweep_duration_h: f64,
    pub strict_paper: bool,
    /// Branch whose corridor is traced and duplicated for the parallel-line scheme.
    pub target_branch: BranchId,
    pub binding_tol: f64,
    pub stress_threshold: f64,
    /// Solve schemes on separate threads.
    pub parallel: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            schemes: SchemeId::ALL.to_vec(),
            solver: SolverConfig::default(),
            reconfiguration_time_limit_s: None,
            formulation: FormulationConfig::default(),
            out_dir: None,
            sweep_sizes_mw: (0..7).map(|i| 100.0 + 50.0 * i as f64).collect(),
            sweep_duration_h: 4.0,
            strict_paper: true,
            target_branch: BranchId(19),
            binding_tol: 1e-4,
            stress_threshold: 0.70,
            parallel: true,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.schemes.is_empty() {
            return Err(StudyError::Config("no schemes selected".into()));
        }
        if self.sweep_sizes_mw.windows(2).any(|w| w[1] <= w[0]) {
            return Err(StudyError::Config("sweep sizes must be strictly ascending".into()));
        }
        let floor_ok = |s: f64| if self.strict_paper { s > 0.0 } else { s >= 0.0 };
        if let Some(bad) = self.sweep_sizes_mw.iter().find(|s| !floor_ok(**s) || !s.is_finite()) {
            return Err(StudyError::Config(format!(
                "sweep size {bad} MW not allowed{}",
                if self.strict_paper { " in strict mode" } else { "" }
            )));
        }
        if !(self.sweep_duration_h > 0.0) {
            return Err(StudyError::Config("sweep duration must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.binding_tol) {
            return Err(StudyError::Config("binding_tol must be in [0, 1)".into()));
        }
        self.solver.validate().map_err(|e| StudyError::Config(e.to_string()))
    }

    fn solver_for(&self, scheme: SchemeId) -> SolverConfig {
        let mut s = self.solver.clone();
        if let (true, Some(limit)) = (scheme.has_reconfiguration(), self.reconfiguration_time_limit_s) {
            s.time_limit_s = limit;
        }
        s
    }
}

/// Everything produced by one build, solve, price and measure pass.
#[derive(Clone, Debug)]
pub struct SchemeRun {
    pub scheme: SchemeId,
    /// The case the scheme was built on (with the parallel twin for PT).
    pub case: Case,
    pub model: MilpModel,
    pub mip: MipSolution,
    pub lp: Option<LpSolution>,
    pub lmp: Option<LmpMatrix>,
    pub load_payment: Option<f64>,
    pub congestion: Option<CongestionReport>,
    pub storage: Option<StorageProfile>,
}

impl SchemeRun {
    pub fn has_solution(&self) -> bool {
        self.mip.has_incumbent()
    }

    /// Signed flow of `branch` in `hour`; zero when the branch is switched out.
    pub fn flow(&self, branch: BranchId, hour: usize) -> Option<f64> {
        if !self.has_solution() {
            return None;
        }
        if let Some(j) = self.model.var_index(VarKind::InService, branch.0, hour) {
            if self.mip.values[j] < 0.5 {
                return Some(0.0);
            }
        }
        self.mip.value(&self.model, VarKind::Flow, branch.0, hour)
    }
}

/// The case a scheme is built on: PT adds a parallel twin of the target
/// branch, the others use the study case unchanged.
pub fn scheme_case(case: &Case, scheme: SchemeId, target: BranchId) -> Result<Case, CaseError> {
    if scheme.is_parallel_line() {
        case.add_parallel_line(target)
    } else {
        Ok(case.clone())
    }
}

pub fn run_scheme(case: &Case, scheme: SchemeId, cfg: &StudyConfig) -> Result<SchemeRun, StudyError> {
    let scase = scheme_case(case, scheme, cfg.target_branch)?;
    let model = build(&scase, scheme, &cfg.formulation).map_err(|source| StudyError::Build { scheme, source })?;
    let solver = cfg.solver_for(scheme);
    let mip = solve_mip(&model, &solver).map_err(|source| StudyError::Solve { scheme, source })?;
    let mut run = SchemeRun {
        scheme,
        case: scase,
        model,
        mip,
        lp: None,
        lmp: None,
        load_payment: None,
        congestion: None,
        storage: None,
    };
    if !run.has_solution() {
        return Ok(run);
    }
    let metrics = |source| StudyError::Metrics { scheme, source };
    run.congestion = Some(
        congestion_stats(&run.model, &run.mip.values, &run.case, cfg.binding_tol, cfg.stress_threshold)
            .map_err(metrics)?,
    );
    if scheme.has_storage() {
        run.storage = Some(storage_profile(&run.model, &run.mip.values, &run.case, 1e-6).map_err(metrics)?);
    }
    match resolve_lp_fixed(&run.model, &run.mip, &solver) {
        Ok(lp) => {
            let lmp = compute_lmp(&lp, &run.case).map_err(metrics)?;
            run.load_payment = Some(load_payment(&lmp, &run.case).map_err(metrics)?);
            run.lmp = Some(lmp);
            run.lp = Some(lp);
        }
        // Pricing is optional for backends without duals.
        Err(GatewayError::NoDuals(_)) => {}
        Err(source) => return Err(StudyError::Solve { scheme, source }),
    }
    Ok(run)
}

fn run_many(case: &Case, schemes: &[SchemeId], cfg: &StudyConfig) -> Vec<Result<SchemeRun, StudyError>> {
    if cfg.parallel && schemes.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = schemes.iter().map(|&id| s.spawn(move || run_scheme(case, id, cfg))).collect();
            handles.into_iter().map(|h| h.join().expect("scheme worker panicked")).collect()
        })
    } else {
        schemes.iter().map(|&id| run_scheme(case, id, cfg)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub scheme: SchemeId,
    pub status: String,
    pub operation_cost: Option<f64>,
    pub best_bound: Option<f64>,
    pub cost_reduction: Option<f64>,
    pub avg_congested_per_hour: Option<f64>,
    pub load_payment: Option<f64>,
    pub solve_time_s: f64,
    pub gap: Option<f64>,
}

#[derive(Debug)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// Successful runs in scheme order; failed schemes appear only in `rows`.
    pub runs: Vec<SchemeRun>,
}

impl Comparison {
    pub fn run(&self, scheme: SchemeId) -> Option<&SchemeRun> {
        self.runs.iter().find(|r| r.scheme == scheme)
    }

    pub fn row(&self, scheme: SchemeId) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }
}

/// Runs every configured scheme, always including the benchmark, and
/// reports costs relative to it. A failing scheme yields a row carrying its
/// status and the remaining schemes still run.
pub fn run_comparison(case: &Case, cfg: &StudyConfig) -> Result<Comparison, StudyError> {
    cfg.validate()?;
    let mut schemes = cfg.schemes.clone();
    if !schemes.contains(&SchemeId::Scuc) {
        schemes.insert(0, SchemeId::Scuc);
    }
    schemes.sort();
    schemes.dedup();
    let results = run_many(case, &schemes, cfg);

    let benchmark = results.iter().find_map(|r| match r {
        Ok(run) if run.scheme == SchemeId::Scuc && run.has_solution() => Some(run.mip.objective),
        _ => None,
    });
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (scheme, result) in schemes.iter().copied().zip(results) {
        match result {
            Ok(run) => {
                let solved = run.has_solution();
                let cost = solved.then_some(run.mip.objective);
                rows.push(ComparisonRow {
                    scheme,
                    status: run.mip.status.name().to_string(),
                    operation_cost: cost,
                    best_bound: run.mip.best_bound.is_finite().then_some(run.mip.best_bound),
                    cost_reduction: match (cost, benchmark) {
                        (Some(c), Some(b)) => cost_reduction(c, b).ok(),
                        _ => None,
                    },
                    avg_congested_per_hour: run.congestion.as_ref().map(|c| c.avg_congested_per_hour),
                    load_payment: run.load_payment,
                    solve_time_s: run.mip.solve_time_s,
                    gap: solved.then_some(run.mip.gap),
                });
                runs.push(run);
            }
            Err(e) => rows.push(ComparisonRow {
                scheme,
                status: format!("error: {e}"),
                operation_cost: None,
                best_bound: None,
                cost_reduction: None,
                avg_congested_per_hour: None,
                load_payment: None,
                solve_time_s: 0.0,
                gap: None,
            }),
        }
    }
    Ok(Comparison { rows, runs })
}

/// Storage resized to `size_mw` per unit with energy `duration_h * size_mw`,
/// keeping each unit's initial state of charge as a fraction of capacity.
/// Size zero removes storage and virtual-transmission pairs.
pub fn resize_storage(case: &Case, size_mw: f64, duration_h: f64) -> Result<Case, CaseError> {
    let mut out = case.clone();
    if size_mw == 0.0 {
        out.storage.clear();
        out.vt_pairs.clear();
    } else {
        for e in &mut out.storage {
            let fraction = if e.e_max_mwh > 0.0 { e.e_initial_mwh / e.e_max_mwh } else { 0.0 };
            e.p_charge_max_mw = size_mw;
            e.p_discharge_max_mw = size_mw;
            e.e_min_mwh = 0.0;
            e.e_max_mwh = duration_h * size_mw;
            e.e_initial_mwh = fraction * e.e_max_mwh;
        }
    }
    out.validate()?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub size_mw: f64,
    pub energy_mwh: f64,
    pub status: SolveStatus,
    pub operation_cost: f64,
    pub best_bound: f64,
    pub load_payment: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    /// Consecutive size pairs whose cost rises by more than twice the gap.
    pub anomalies: Vec<(f64, f64)>,
}

/// Solves the virtual-transmission scheme at every configured storage size.
pub fn run_size_sweep(case: &Case, cfg: &StudyConfig) -> Result<Sweep, StudyError> {
    cfg.validate()?;
    if cfg.sweep_sizes_mw.is_empty() {
        return Err(StudyError::Config("no sweep sizes".into()));
    }
    let cases = cfg
        .sweep_sizes_mw
        .iter()
        .map(|&s| resize_storage(case, s, cfg.sweep_duration_h))
        .collect::<Result<Vec<_>, _>>()?;
    let one = |c: &Case, size: f64| -> Result<SweepPoint, StudyError> {
        let scheme = if size == 0.0 { SchemeId::Scuc } else { SchemeId::ScucVt };
        let run = run_scheme(c, scheme, cfg)?;
        if !run.has_solution() {
            return Err(StudyError::NoSolution { scheme, status: run.mip.status });
        }
        Ok(SweepPoint {
            size_mw: size,
            energy_mwh: size * cfg.sweep_duration_h,
            status: run.mip.status,
            operation_cost: run.mip.objective,
            best_bound: run.mip.best_bound,
            load_payment: run.load_payment,
        })
    };
    let sizes = &cfg.sweep_sizes_mw;
    let results: Vec<_> = if cfg.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> =
                cases.iter().zip(sizes).map(|(c, &size)| s.spawn(move || one(c, size))).collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        })
    } else {
        cases.iter().zip(sizes).map(|(c, &size)| one(c, size)).collect()
    };
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let tol = 2.0 * cfg.solver.mip_gap;
    let anomalies = points
        .windows(2)
        .filter(|w| w[1].operation_cost > w[0].operation_cost + tol * w[0].operation_cost.abs())
        .map(|w| (w[0].size_mw, w[1].size_mw))
        .collect();
    Ok(Sweep { points, anomalies })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTraceRow {
    pub scheme: SchemeId,
    pub hour: usize,
    pub flow_mw: f64,
    /// Sum over the branch and its parallel twins.
    pub corridor_mw: f64,
}

/// Per-hour flow on `branch` for each solved run.
pub fn run_flow_trace(runs: &[SchemeRun], branch: BranchId) -> Result<Vec<FlowTraceRow>, StudyError> {
    let mut rows = Vec::new();
    for run in runs.iter().filter(|r| r.has_solution()) {
        if run.case.branch(branch).is_none() {
            return Err(CaseError::UnknownBranch(branch).into());
        }
        let twins: Vec<BranchId> =
            run.case.branches.iter().filter(|b| b.parallel_of == Some(branch)).map(|b| b.id).collect();
        for t in 0..run.case.horizon() {
            let flow_mw = run.flow(branch, t).unwrap_or(0.0);
            let corridor_mw = flow_mw + twins.iter().map(|&k| run.flow(k, t).unwrap_or(0.0)).sum::<f64>();
            rows.push(FlowTraceRow { scheme: run.scheme, hour: t, flow_mw, corridor_mw });
        }
    }
    Ok(rows)
}

/// `LMP(a) - LMP(b)` for two schemes on the same case.
pub fn run_lmp_diff(case: &Case, a: SchemeId, b: SchemeId, cfg: &StudyConfig) -> Result<LmpMatrix, StudyError> {
    cfg.validate()?;
    let results = run_many(case, &[a, b], cfg);
    let mut lmps = Vec::new();
    for (scheme, result) in [a, b].into_iter().zip(results) {
        let run = result?;
        match run.lmp {
            Some(l) => lmps.push(l),
            None => return Err(StudyError::NoSolution { scheme, status: run.mip.status }),
        }
    }
    lmp_difference(&lmps[0], &lmps[1]).map_err(|source| StudyError::Metrics { scheme: a, source })
}

/// CSV writers for study results. Unavailable values are written as empty
/// cells; the status column says why.
pub mod report {
    use super::*;

    fn out_err(path: &Path, e: impl std::fmt::Display) -> StudyError {
        StudyError::Output { path: path.to_path_buf(), message: e.to_string() }
    }

    fn num(x: Option<f64>) -> String {
        x.filter(|v| v.is_finite()).map(|v| v.to_string()).unwrap_or_default()
    }

    fn write(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), StudyError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| out_err(path, e))?;
        }
        let mut w = csv::Writer::from_path(path).map_err(|e| out_err(path, e))?;
        w.write_record(header).map_err(|e| out_err(path, e))?;
        for r in rows {
            w.write_record(&r).map_err(|e| out_err(path, e))?;
        }
        w.flush().map_err(|e| out_err(path, e))
    }

    pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<(), StudyError> {
        let header = [
            "scheme",
            "total_cost_usd",
            "cost_reduction_pct",
            "avg_congested_lines_per_hour",
            "solve_time_s",
            "mip_gap",
            "status",
        ];
        write(
            path,
            &header,
            rows.iter().map(|r| {
                vec![
                    r.scheme.name().to_string(),
                    num(r.operation_cost),
                    num(r.cost_reduction.map(|x| 100.0 * x)),
                    num(r.avg_congested_per_hour),
                    r.solve_time_s.to_string(),
                    num(r.gap),
                    r.status.clone(),
                ]
            }),
        )
    }

    pub fn write_settlement(path: &Path, rows: &[ComparisonRow]) -> Result<(), StudyError> {
        let header = ["scheme", "total_cost_usd", "load_payment_usd", "status"];
        write(
            path,
            &header,
            rows.iter().map(|r| {
                vec![r.scheme.name().to_string(), num(r.operation_cost), num(r.load_payment), r.status.clone()]
            }),
        )
    }

    pub fn write_congestion(path: &Path, runs: &[SchemeRun]) -> Result<(), StudyError> {
        let header = ["scheme", "branch", "hour", "flow_mw", "utilization", "binding"];
        let mut rows = Vec::new();
        for run in runs {
            let Some(c) = &run.congestion else { continue };
            for lh in &c.line_hours {
                rows.push(vec![
                    run.scheme.name().to_string(),
                    lh.branch.to_string(),
                    lh.hour.to_string(),
                    lh.flow_mw.to_string(),
                    lh.utilization.to_string(),
                    c.is_binding(lh.branch, lh.hour).to_string(),
                ]);
            }
        }
        write(path, &header, rows)
    }

    pub fn write_lmp(path: &Path, runs: &[SchemeRun]) -> Result<(), StudyError> {
        let header = ["scheme", "bus", "hour", "lmp_usd_per_mwh"];
        let mut rows = Vec::new();
        for run in runs {
            let Some(l) = &run.lmp else { continue };
            for (i, bus) in l.buses.iter().enumerate() {
                for t in 0..l.hours {
                    rows.push(vec![
                        run.scheme.name().to_string(),
                        bus.to_string(),
                        t.to_string(),
                        l.get(i, t).to_string(),
                    ]);
                }
            }
        }
        write(path, &header, rows)
    }

    /// One row per bus, one column per hour.
    pub fn write_lmp_matrix(path: &Path, m: &LmpMatrix) -> Result<(), StudyError> {
        let mut header = vec!["bus".to_string()];
        header.extend((0..m.hours).map(|t| format!("h{t}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = m.buses.iter().enumerate().map(|(i, bus)| {
            let mut r = vec![bus.to_string()];
            r.extend((0..m.hours).map(|t| m.get(i, t).to_string()));
            r
        });
        write(path, &header_refs, rows)
    }

    pub fn write_storage(path: &Path, runs: &[SchemeRun]) -> Result<(), StudyError> {
        let header = ["scheme", "storage", "hour", "charge_mw", "discharge_mw", "energy_mwh"];
        let mut rows = Vec::new();
        for run in runs {
            let Some(p) = &run.storage else { continue };
            for u in &p.units {
                for t in 0..u.energy_mwh.len() {
                    rows.push(vec![
                        run.scheme.name().to_string(),
                        u.storage.to_string(),
                        t.to_string(),
                        u.charge_mw[t].to_string(),
                        u.discharge_mw[t].to_string(),
                        u.energy_mwh[t].to_string(),
                    ]);
                }
            }
        }
        write(path, &header, rows)
    }

    pub fn write_flow_trace(path: &Path, rows: &[FlowTraceRow]) -> Result<(), StudyError> {
        let header = ["scheme", "hour", "flow_mw", "corridor_mw"];
        write(
            path,
            &header,
            rows.iter().map(|r| {
                vec![r.scheme.name().to_string(), r.hour.to_string(), r.flow_mw.to_string(), r.corridor_mw.to_string()]
            }),
        )
    }

    pub fn write_sweep(path: &Path, sweep: &Sweep) -> Result<(), StudyError> {
        let header = ["size_mw", "energy_mwh", "total_cost_usd", "load_payment_usd"];
        write(
            path,
            &header,
            sweep.points.iter().map(|p| {
                vec![p.size_mw.to_string(), p.energy_mwh.to_string(), p.operation_cost.to_string(), num(p.load_payment)]
            }),
        )
    }

    /// Writes every comparison CSV into `dir`; the flow trace only when the
    /// case has the target branch.
    pub fn write_comparison_outputs(dir: &Path, cmp: &Comparison, target: BranchId) -> Result<(), StudyError> {
        write_comparison(&dir.join("comparison.csv"), &cmp.rows)?;
        write_settlement(&dir.join("settlement.csv"), &cmp.rows)?;
        write_congestion(&dir.join("congestion.csv"), &cmp.runs)?;
        write_lmp(&dir.join("lmp.csv"), &cmp.runs)?;
        write_storage(&dir.join("storage.csv"), &cmp.runs)?;
        if cmp.runs.iter().all(|r| r.case.branch(target).is_some()) {
            write_flow_trace(&dir.join("flow_trace.csv"), &run_flow_trace(&cmp.runs, target)?)?;
        }
        Ok(())
    }
}
