//! Solver results.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{MilpModel, Tag, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped at the configured relative gap.
    GapLimit,
    /// Stopped at the time limit; values hold the incumbent if one exists.
    TimeLimit,
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MipSolution {
    pub status: SolveStatus,
    /// Objective of the incumbent, $. NaN when no incumbent exists.
    pub objective: f64,
    /// Lower bound proven by the solver, $.
    pub best_bound: f64,
    /// One value per model column; empty when no incumbent exists.
    pub values: Vec<f64>,
    pub gap: f64,
    pub solve_time_s: f64,
}

impl MipSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, model: &MilpModel, kind: VarKind, entity: u32, hour: usize) -> Option<f64> {
        model.var_index(kind, entity, hour).and_then(|j| self.values.get(j).copied())
    }
}

/// Result of the continuous re-solve with all integer columns pinned.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Sensitivity of the optimal objective to each row's right-hand side.
    pub duals: BTreeMap<Tag, f64>,
    pub solve_time_s: f64,
}

impl LpSolution {
    pub fn dual(&self, tag: &Tag) -> Option<f64> {
        self.duals.get(tag).copied()
    }

    pub fn value(&self, model: &MilpModel, kind: VarKind, entity: u32, hour: usize) -> Option<f64> {
        model.var_index(kind, entity, hour).and_then(|j| self.values.get(j).copied())
    }
}
