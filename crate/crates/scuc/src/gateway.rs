//! Solver backends, the commitment-fixed pricing re-solve, and model export.

use std::collections::BTreeMap;
use std::ffi::CString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense as HighsSense};
use serde::{Deserialize, Serialize};

use scuc_core::export::{write_lp, write_mps};
use scuc_core::model::{MilpModel, ModelError, Sense};
use scuc_core::{LpSolution, MipSolution, SolveStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `highs` or `microlp`.
    pub backend: String,
    pub time_limit_s: f64,
    pub mip_gap: f64,
    pub threads_hint: u32,
    pub feasibility_tol: f64,
    /// Distance from an integer within which a value is rounded when pinning.
    pub integrality_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: "highs".into(),
            time_limit_s: 3600.0,
            mip_gap: 1e-4,
            threads_hint: 1,
            feasibility_tol: 1e-6,
            integrality_tol: 1e-5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let positive = [
            ("time_limit_s", self.time_limit_s),
            ("mip_gap", self.mip_gap),
            ("feasibility_tol", self.feasibility_tol),
            ("integrality_tol", self.integrality_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GatewayError::Config(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if self.threads_hint == 0 {
            return Err(GatewayError::Config("threads_hint must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("unknown backend {0:?} (expected highs or microlp)")]
    UnknownBackend(String),
    #[error("{backend} failed: {message}")]
    Backend { backend: &'static str, message: String },
    #[error("{0} does not report duals")]
    NoDuals(&'static str),
    #[error("pricing needs an incumbent, MIP status is {0}")]
    NoIncumbent(SolveStatus),
    #[error("commitment-fixed LP is {0}; the pinned integers do not admit a feasible dispatch")]
    FixedLpInfeasible(SolveStatus),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// What a backend hands back before it is shaped into a solution type.
#[derive(Clone, Debug)]
pub struct RawSolve {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub values: Vec<f64>,
    /// Row duals as d(objective)/d(rhs), in model row order.
    pub row_duals: Option<Vec<f64>>,
    pub gap: f64,
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &MilpModel, config: &SolverConfig, want_duals: bool) -> Result<RawSolve, GatewayError>;
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn Backend>, GatewayError> {
    match name.to_ascii_lowercase().as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        "microlp" => Ok(Box::new(MicrolpBackend)),
        _ => Err(GatewayError::UnknownBackend(name.to_string())),
    }
}

pub struct HighsBackend;

impl Backend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, config: &SolverConfig, want_duals: bool) -> Result<RawSolve, GatewayError> {
        let fail = |message: String| GatewayError::Backend { backend: "highs", message };
        let mut problem = RowProblem::default();
        let objective = model.objective();
        let cols: Vec<_> = model
            .variables()
            .iter()
            .enumerate()
            .map(|(j, v)| problem.add_column_with_integrality(objective[j], v.lower..=v.upper, v.integer))
            .collect();
        for c in model.constraints() {
            let terms = c.terms.iter().map(|&(j, a)| (cols[j], a));
            match c.sense {
                Sense::Le => problem.add_row(..=c.rhs, terms),
                Sense::Eq => problem.add_row(c.rhs..=c.rhs, terms),
                Sense::Ge => problem.add_row(c.rhs.., terms),
            }
        }
        let mut highs = problem
            .try_optimise(HighsSense::Minimise)
            .map_err(|s| fail(format!("model rejected: {s:?}")))?;
        highs.make_quiet();
        let options: [(&str, f64); 5] = [
            ("time_limit", config.time_limit_s),
            ("mip_rel_gap", config.mip_gap),
            // Tighter than the contract so returned points pass the external check.
            ("primal_feasibility_tolerance", config.feasibility_tol * 0.1),
            ("dual_feasibility_tolerance", config.feasibility_tol * 0.1),
            ("mip_feasibility_tolerance", config.feasibility_tol * 0.1),
        ];
        for (name, value) in options {
            highs.try_set_option(name, value).map_err(|e| fail(format!("option {name}: {e:?}")))?;
        }
        highs
            .try_set_option("threads", config.threads_hint as i32)
            .map_err(|e| fail(format!("option threads: {e:?}")))?;
        let solved = highs.try_solve().map_err(|s| fail(format!("run failed: {s:?}")))?;

        let is_mip = model.has_integers();
        let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let gap = if is_mip { solved.mip_gap() } else { 0.0 };
        let status = match solved.status() {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
                if is_mip && gap > 1e-9 {
                    SolveStatus::GapLimit
                } else {
                    SolveStatus::Optimal
                }
            }
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ReachedSolutionLimit => SolveStatus::TimeLimit,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Infeasible,
            HighsModelStatus::Unbounded => SolveStatus::Unbounded,
            other => return Err(fail(format!("model status {other:?}"))),
        };
        let usable = matches!(status, SolveStatus::Optimal | SolveStatus::GapLimit)
            || (status == SolveStatus::TimeLimit && has_point);
        if !usable {
            let best_bound = if is_mip {
                solved.double_info_value(c"mip_dual_bound").unwrap_or(f64::NEG_INFINITY)
            } else {
                f64::NEG_INFINITY
            };
            return Ok(RawSolve {
                status,
                objective: f64::NAN,
                best_bound,
                values: Vec::new(),
                row_duals: None,
                gap: f64::INFINITY,
            });
        }
        let solution = solved.get_solution();
        let objective = solved.objective_value();
        let best_bound = if is_mip {
            solved.double_info_value(c"mip_dual_bound").unwrap_or(f64::NEG_INFINITY)
        } else {
            objective
        };
        let row_duals = (want_duals && !is_mip).then(|| solution.dual_rows().to_vec());
        Ok(RawSolve {
            status,
            objective,
            best_bound,
            values: solution.columns().to_vec(),
            row_duals,
            gap: if gap.is_finite() { gap } else { 0.0 },
        })
    }
}

/// Pure-Rust branch and bound. Useful where a C++ toolchain is unavailable;
/// reports no duals, so pricing needs the HiGHS backend.
pub struct MicrolpBackend;

impl Backend for MicrolpBackend {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn solve(&self, model: &MilpModel, config: &SolverConfig, want_duals: bool) -> Result<RawSolve, GatewayError> {
        if want_duals {
            return Err(GatewayError::NoDuals("microlp"));
        }
        let fail = |message: String| GatewayError::Backend { backend: "microlp", message };
        let mut problem = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
        let objective = model.objective();
        let mut vars = Vec::with_capacity(model.var_count());
        for (j, v) in model.variables().iter().enumerate() {
            let var = if v.integer && v.lower == 0.0 && v.upper == 1.0 {
                problem.add_binary_var(objective[j])
            } else if v.integer {
                let clamp = |x: f64| x.clamp(i32::MIN as f64, i32::MAX as f64) as i32;
                problem.add_integer_var(objective[j], (clamp(v.lower), clamp(v.upper)))
            } else {
                problem.add_var(objective[j], (v.lower, v.upper))
            };
            vars.push(var);
        }
        for c in model.constraints() {
            let op = match c.sense {
                Sense::Le => microlp::ComparisonOp::Le,
                Sense::Eq => microlp::ComparisonOp::Eq,
                Sense::Ge => microlp::ComparisonOp::Ge,
            };
            let terms: Vec<(microlp::Variable, f64)> = c.terms.iter().map(|&(j, a)| (vars[j], a)).collect();
            problem.add_constraint(terms, op, c.rhs);
        }
        let mut options = microlp::SolveOptions::default();
        options.time_limit = Some(Duration::from_secs_f64(config.time_limit_s));
        options.mip_gap = config.mip_gap;
        match problem.solve_with(options) {
            Ok(microlp::SolveOutcome::Solution(solution)) => {
                let stats = solution.stats();
                let status = match solution.termination_reason() {
                    microlp::TerminationReason::ProvenOptimal => SolveStatus::Optimal,
                    microlp::TerminationReason::MipGap => SolveStatus::GapLimit,
                    _ => SolveStatus::TimeLimit,
                };
                let objective = solution.objective();
                let values = vars.iter().map(|&v| solution[v]).collect();
                Ok(RawSolve {
                    status,
                    objective,
                    best_bound: stats.best_bound.unwrap_or(objective),
                    values,
                    row_duals: None,
                    gap: stats.gap.unwrap_or(0.0),
                })
            }
            Ok(microlp::SolveOutcome::Interrupted(_)) => Ok(empty(SolveStatus::TimeLimit)),
            Err(microlp::Error::Infeasible) => Ok(empty(SolveStatus::Infeasible)),
            Err(microlp::Error::Unbounded) => Ok(empty(SolveStatus::Unbounded)),
            Err(e) => Err(fail(e.to_string())),
        }
    }
}

fn empty(status: SolveStatus) -> RawSolve {
    RawSolve {
        status,
        objective: f64::NAN,
        best_bound: f64::NEG_INFINITY,
        values: Vec::new(),
        row_duals: None,
        gap: f64::INFINITY,
    }
}

pub fn solve_mip(model: &MilpModel, config: &SolverConfig) -> Result<MipSolution, GatewayError> {
    config.validate()?;
    let backend = backend_by_name(&config.backend)?;
    let start = Instant::now();
    let raw = backend.solve(model, config, false)?;
    Ok(MipSolution {
        status: raw.status,
        objective: raw.objective,
        best_bound: raw.best_bound,
        values: raw.values,
        gap: raw.gap,
        solve_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Pins every integer column at the rounded incumbent and re-solves the
/// remaining LP for row duals.
///
/// A time-limited incumbent is accepted: its prices are those of the
/// commitment it proposes.
pub fn resolve_lp_fixed(model: &MilpModel, mip: &MipSolution, config: &SolverConfig) -> Result<LpSolution, GatewayError> {
    config.validate()?;
    if !mip.has_incumbent() || !matches!(mip.status, SolveStatus::Optimal | SolveStatus::GapLimit | SolveStatus::TimeLimit) {
        return Err(GatewayError::NoIncumbent(mip.status));
    }
    let fixed = model.pinned(&mip.values, config.integrality_tol)?;
    let backend = backend_by_name(&config.backend)?;
    let start = Instant::now();
    let raw = backend.solve(&fixed, config, true)?;
    if raw.status != SolveStatus::Optimal {
        return Err(GatewayError::FixedLpInfeasible(raw.status));
    }
    let row_duals = raw.row_duals.ok_or(GatewayError::NoDuals(backend.name()))?;
    let duals: BTreeMap<_, _> = fixed.constraints().iter().zip(row_duals).map(|(c, d)| (c.tag, d)).collect();
    Ok(LpSolution {
        status: raw.status,
        objective: raw.objective,
        values: raw.values,
        duals,
        solve_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Mps,
    Lp,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Mps => "mps",
            ExportFormat::Lp => "lp",
        }
    }
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mps" => Ok(ExportFormat::Mps),
            "lp" => Ok(ExportFormat::Lp),
            _ => Err(format!("unknown format {s:?} (expected mps or lp)")),
        }
    }
}

pub fn export_model(model: &MilpModel, path: impl AsRef<Path>, format: ExportFormat) -> Result<(), GatewayError> {
    let path = path.as_ref();
    let name = model.scheme.name();
    let text = match format {
        ExportFormat::Mps => write_mps(model, name),
        ExportFormat::Lp => write_lp(model, name),
    };
    fs::write(path, text).map_err(|source| GatewayError::Io { path: path.to_path_buf(), source })
}

/// Reads a model file with HiGHS's own reader and solves it.
pub fn solve_model_file(path: impl AsRef<Path>, config: &SolverConfig) -> Result<(SolveStatus, f64), GatewayError> {
    let fail = |message: String| GatewayError::Backend { backend: "highs", message };
    let path = path.as_ref();
    let c_path = CString::new(path.to_string_lossy().as_bytes()).map_err(|e| fail(e.to_string()))?;
    let set_double = |h: *mut std::ffi::c_void, name: &std::ffi::CStr, value: f64| unsafe {
        highs_sys::Highs_setDoubleOptionValue(h, name.as_ptr(), value)
    };
    // SAFETY: the handle is created, used and destroyed within this block and
    // every string passed in outlives the call that receives it.
    unsafe {
        let h = highs_sys::Highs_create();
        highs_sys::Highs_setBoolOptionValue(h, c"output_flag".as_ptr(), 0);
        set_double(h, c"time_limit", config.time_limit_s);
        set_double(h, c"mip_rel_gap", config.mip_gap);
        let read = highs_sys::Highs_readModel(h, c_path.as_ptr());
        if read == highs_sys::STATUS_ERROR {
            highs_sys::Highs_destroy(h);
            return Err(fail(format!("cannot read {}", path.display())));
        }
        highs_sys::Highs_run(h);
        let status = highs_sys::Highs_getModelStatus(h);
        let objective = highs_sys::Highs_getObjectiveValue(h);
        highs_sys::Highs_destroy(h);
        let status = match status {
            s if s == highs_sys::MODEL_STATUS_OPTIMAL || s == highs_sys::MODEL_STATUS_MODEL_EMPTY => SolveStatus::Optimal,
            s if s == highs_sys::MODEL_STATUS_INFEASIBLE => SolveStatus::Infeasible,
            s if s == highs_sys::MODEL_STATUS_REACHED_TIME_LIMIT => SolveStatus::TimeLimit,
            s => return Err(fail(format!("model status {s}"))),
        };
        Ok((status, objective))
    }
}
