//! JSON case files.

use std::fs;
use std::path::{Path, PathBuf};

use scuc_core::{Case, CaseError};

#[derive(Debug, thiserror::Error)]
pub enum CaseFileError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid case: {0}")]
    Invalid(#[from] CaseError),
}

/// Parses and validates a case from JSON text.
pub fn parse_case(text: &str) -> Result<Case, CaseFileError> {
    let case: Case = serde_json::from_str(text).map_err(|e| CaseFileError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    case.validate()?;
    Ok(case)
}

pub fn case_to_json(case: &Case) -> String {
    let mut text = serde_json::to_string_pretty(case).expect("case serializes");
    text.push('\n');
    text
}

pub fn load_case(path: impl AsRef<Path>) -> Result<Case, CaseFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CaseFileError::Read { path: path.to_path_buf(), source })?;
    parse_case(&text)
}

pub fn save_case(case: &Case, path: impl AsRef<Path>) -> Result<(), CaseFileError> {
    let path = path.as_ref();
    fs::write(path, case_to_json(case)).map_err(|source| CaseFileError::Write { path: path.to_path_buf(), source })
}

/// The unmodified 24-bus reliability test system shipped with the crate.
pub const BASE_CASE_JSON: &str = include_str!("../data/ieee24_rts79.case");

pub fn bundled_base_case() -> Case {
    parse_case(BASE_CASE_JSON).expect("bundled base case is valid")
}

/// The decarbonized study case: coal units removed, solar at buses 14-16,
/// storage at both ends of branch 19.
pub const MODIFIED_CASE_JSON: &str = include_str!("../data/ieee24_modified.case");

pub fn bundled_modified_case() -> Case {
    parse_case(MODIFIED_CASE_JSON).expect("bundled study case is valid")
}
