//! File formats, solver backends and experiment orchestration on top of
//! `scuc-core`.

pub mod case_file;
pub mod gateway;
pub mod study;

pub use scuc_core;
