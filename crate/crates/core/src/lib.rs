//! Day-ahead unit commitment models for congestion studies.
//!
//! This crate is `no_std` (with `alloc`). It holds the grid data model, the
//! MILP formulations for the seven scheduling schemes, solution containers,
//! market and congestion metrics, and MPS/LP text writers. Solving, file IO
//! and the command line live in the `scuc` companion crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod export;
pub mod formulation;
pub mod grid;
pub mod metrics;
pub mod model;
pub mod rts;
pub mod solution;

pub use formulation::{build, FormulationConfig, SchemeId};
pub use grid::{
    Branch, BranchId, Bus, BusId, Case, CaseError, CaseMeta, Generator, GeneratorId, LoadModel,
    SolarId, SolarPlant, StorageId, StorageUnit, VtId, VtPair,
};
pub use metrics::{
    CongestionReport, LmpMatrix, MetricsError, SettlementReport, StorageProfile,
};
pub use model::{Family, LinearConstraint, MilpModel, ModelError, Sense, Tag, VarKind, VarRef};
pub use rts::{build_modified_rts_case, ModifiedRtsConfig, RtsError};
pub use solution::{LpSolution, MipSolution, SolveStatus};
