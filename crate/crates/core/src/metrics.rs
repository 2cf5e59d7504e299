//! Market and operating metrics computed from solved models.

use alloc::vec::Vec;

use crate::grid::{BranchId, BusId, Case, StorageId};
use crate::model::{MilpModel, Tag, VarKind};
use crate::solution::{LpSolution, MipSolution};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no dual for balance row of bus {bus} hour {hour}")]
    MissingBalance { bus: BusId, hour: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("benchmark cost must be positive, got {0}")]
    BadBenchmark(f64),
    #[error("solution holds no values for this model")]
    MissingValues,
    #[error("storage {storage} hour {hour}: energy recurrence off by {residual} MWh")]
    RecurrenceMismatch {
        storage: StorageId,
        hour: usize,
        residual: f64,
    },
}

/// Locational marginal prices, $/MWh, by bus and hour.
#[derive(Clone, Debug, PartialEq)]
pub struct LmpMatrix {
    pub buses: Vec<BusId>,
    pub hours: usize,
    /// Row-major: `values[bus_position * hours + hour]`.
    pub values: Vec<f64>,
}

impl LmpMatrix {
    pub fn from_fn(buses: Vec<BusId>, hours: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(buses.len() * hours);
        for i in 0..buses.len() {
            for t in 0..hours {
                values.push(f(i, t));
            }
        }
        Self { buses, hours, values }
    }

    pub fn get(&self, bus_position: usize, hour: usize) -> f64 {
        self.values[bus_position * self.hours + hour]
    }

    fn same_shape(&self, other: &LmpMatrix) -> bool {
        self.buses == other.buses && self.hours == other.hours
    }
}

/// LMP at every bus and hour: the dual of the nodal balance row divided by
/// the interval length.
pub fn compute_lmp(lp: &LpSolution, case: &Case) -> Result<LmpMatrix, MetricsError> {
    let buses: Vec<BusId> = case.buses.iter().map(|b| b.id).collect();
    let hours = case.horizon();
    let dt = case.meta.interval_hours;
    let mut values = Vec::with_capacity(buses.len() * hours);
    for &bus in &buses {
        for hour in 0..hours {
            let dual = lp
                .dual(&Tag::balance(bus.0, hour))
                .ok_or(MetricsError::MissingBalance { bus, hour })?;
            values.push(dual / dt);
        }
    }
    Ok(LmpMatrix { buses, hours, values })
}

/// Sum over buses and hours of native demand times LMP. Storage charging is
/// not part of demand here.
pub fn load_payment(lmp: &LmpMatrix, case: &Case) -> Result<f64, MetricsError> {
    if lmp.buses.len() != case.buses.len() || lmp.hours != case.horizon() {
        return Err(MetricsError::Dimension("lmp matrix vs case"));
    }
    let dt = case.meta.interval_hours;
    let mut total = 0.0;
    for (i, bus) in case.buses.iter().enumerate() {
        for t in 0..lmp.hours {
            let d = case.demand(bus.id, t).expect("validated bus and hour");
            total += d * dt * lmp.get(i, t);
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineHour {
    pub branch: BranchId,
    pub hour: usize,
    pub flow_mw: f64,
    /// `|flow| / rating`.
    pub utilization: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CongestionReport {
    /// Every in-service branch-hour.
    pub line_hours: Vec<LineHour>,
    pub binding_line_hours: Vec<LineHour>,
    pub stressed_line_hours: Vec<LineHour>,
    pub avg_congested_per_hour: f64,
}

impl CongestionReport {
    pub fn is_binding(&self, branch: BranchId, hour: usize) -> bool {
        self.binding_line_hours
            .iter()
            .any(|l| l.branch == branch && l.hour == hour)
    }
}

/// Binding branch-hours (`|flow| >= (1 - binding_tol) * rating`) and
/// stressed branch-hours (`utilization >= stress_threshold`). Branches
/// switched out in an hour are skipped.
pub fn congestion_stats(
    model: &MilpModel,
    values: &[f64],
    case: &Case,
    binding_tol: f64,
    stress_threshold: f64,
) -> Result<CongestionReport, MetricsError> {
    if values.len() != model.var_count() {
        return Err(MetricsError::MissingValues);
    }
    let hours = case.horizon();
    let mut report = CongestionReport {
        line_hours: Vec::new(),
        binding_line_hours: Vec::new(),
        stressed_line_hours: Vec::new(),
        avg_congested_per_hour: 0.0,
    };
    for k in &case.branches {
        for t in 0..hours {
            if let Some(j) = model.var_index(VarKind::InService, k.id.0, t) {
                if values[j] < 0.5 {
                    continue;
                }
            }
            let j = model
                .var_index(VarKind::Flow, k.id.0, t)
                .ok_or(MetricsError::Dimension("branch missing from model"))?;
            let flow_mw = values[j];
            let lh = LineHour {
                branch: k.id,
                hour: t,
                flow_mw,
                utilization: flow_mw.abs() / k.rating_mw,
            };
            if flow_mw.abs() >= (1.0 - binding_tol) * k.rating_mw {
                report.binding_line_hours.push(lh);
            }
            if lh.utilization >= stress_threshold {
                report.stressed_line_hours.push(lh);
            }
            report.line_hours.push(lh);
        }
    }
    report.avg_congested_per_hour = report.binding_line_hours.len() as f64 / hours as f64;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettlementReport {
    pub total_cost: f64,
    pub load_payment: f64,
    /// `1 - cost / benchmark`, when a benchmark cost was supplied.
    pub cost_reduction_vs_benchmark: Option<f64>,
}

pub fn cost_reduction(cost: f64, benchmark: f64) -> Result<f64, MetricsError> {
    if !(benchmark > 0.0) {
        return Err(MetricsError::BadBenchmark(benchmark));
    }
    Ok(1.0 - cost / benchmark)
}

pub fn settlement(
    mip: &MipSolution,
    lmp: &LmpMatrix,
    case: &Case,
    benchmark_cost: Option<f64>,
) -> Result<SettlementReport, MetricsError> {
    let cost_reduction_vs_benchmark = benchmark_cost
        .map(|b| cost_reduction(mip.objective, b))
        .transpose()?;
    Ok(SettlementReport {
        total_cost: mip.objective,
        load_payment: load_payment(lmp, case)?,
        cost_reduction_vs_benchmark,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitProfile {
    pub storage: StorageId,
    pub charge_mw: Vec<f64>,
    pub discharge_mw: Vec<f64>,
    /// Energy level reported by the solver, MWh.
    pub energy_mwh: Vec<f64>,
    /// Energy level re-derived from the state-of-charge recurrence, MWh.
    pub derived_energy_mwh: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StorageProfile {
    pub units: Vec<UnitProfile>,
}

/// Per-unit charge, discharge and energy series, with the energy trace
/// re-derived from the recurrence and checked against the solver's values
/// step by step.
pub fn storage_profile(
    model: &MilpModel,
    values: &[f64],
    case: &Case,
    tolerance_mwh: f64,
) -> Result<StorageProfile, MetricsError> {
    if values.len() != model.var_count() {
        return Err(MetricsError::MissingValues);
    }
    let dt = case.meta.interval_hours;
    let mut units = Vec::new();
    for e in &case.storage {
        let series = |kind| -> Result<Vec<f64>, MetricsError> {
            (0..case.horizon())
                .map(|t| {
                    model
                        .var_index(kind, e.id.0, t)
                        .map(|j| values[j])
                        .ok_or(MetricsError::Dimension("storage missing from model"))
                })
                .collect()
        };
        let charge_mw = series(VarKind::Charge)?;
        let discharge_mw = series(VarKind::Discharge)?;
        let energy_mwh = series(VarKind::Energy)?;
        let mut derived = Vec::with_capacity(energy_mwh.len());
        let mut prev_reported = e.e_initial_mwh;
        let mut level = e.e_initial_mwh;
        for t in 0..energy_mwh.len() {
            let delta = (e.eta_charge * charge_mw[t] - discharge_mw[t] / e.eta_discharge) * dt;
            let residual = energy_mwh[t] - prev_reported - delta;
            if residual.abs() >= tolerance_mwh {
                return Err(MetricsError::RecurrenceMismatch {
                    storage: e.id,
                    hour: t,
                    residual,
                });
            }
            level += delta;
            derived.push(level);
            prev_reported = energy_mwh[t];
        }
        units.push(UnitProfile {
            storage: e.id,
            charge_mw,
            discharge_mw,
            energy_mwh,
            derived_energy_mwh: derived,
        });
    }
    Ok(StorageProfile { units })
}

/// Elementwise `a - b`.
pub fn lmp_difference(a: &LmpMatrix, b: &LmpMatrix) -> Result<LmpMatrix, MetricsError> {
    if !a.same_shape(b) {
        return Err(MetricsError::Dimension("lmp matrices differ in shape"));
    }
    Ok(LmpMatrix {
        buses: a.buses.clone(),
        hours: a.hours,
        values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
    })
}

/// Largest hourly mismatch of system-wide supply and demand, MW.
pub fn system_balance_residual(model: &MilpModel, values: &[f64], case: &Case) -> Result<f64, MetricsError> {
    if values.len() != model.var_count() {
        return Err(MetricsError::MissingValues);
    }
    let value = |kind, id: u32, t| model.var_index(kind, id, t).map_or(0.0, |j| values[j]);
    let mut worst: f64 = 0.0;
    for t in 0..case.horizon() {
        let mut supply: f64 = case.generators.iter().map(|g| value(VarKind::Output, g.id.0, t)).sum();
        let mut demand = case.total_demand(t).expect("validated hour");
        for b in &case.buses {
            supply += case.solar_injection(b.id, t).expect("validated hour");
        }
        for e in &case.storage {
            supply += value(VarKind::Discharge, e.id.0, t);
            demand += value(VarKind::Charge, e.id.0, t);
        }
        worst = worst.max((supply - demand).abs());
    }
    Ok(worst)
}
