//! File input, manifests and JSON output.

use std::fmt;
use std::io::Write;

use qpolis::copres::json::copres_from_json;
use qpolis::copres::Copresentation;
use qpolis::finite::json::{map_from_json, space_from_json};
use qpolis::finite::{FiniteMap, FiniteSpace};
use qpolis::posite::{posite_from_json, Posite};
use qpolis::verify::RunManifest;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Core(qpolis::error::Error),
    Io(String),
}

impl From<qpolis::error::Error> for CliError {
    fn from(e: qpolis::error::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use qpolis::error::Error as E;
        match self {
            CliError::Io(_) => "IO_ERROR",
            CliError::Core(e) => match e {
                E::Schema(_) => "SCHEMA_ERROR",
                E::UnknownSuite(_) => "UNKNOWN_SUITE",
                E::UnknownDemo(_) => "UNKNOWN_DEMO",
                E::UnsupportedConversion(_) => "UNSUPPORTED_CONVERSION",
                E::NotOpenMap => "NOT_OPEN_MAP",
                E::SideGameIllegal(_) => "SIDE_GAME_ILLEGAL",
                E::IllegalMove { .. } => "ILLEGAL_MOVE",
                _ => "INVALID_INPUT",
            },
        }
    }

    pub fn to_json(&self) -> String {
        json!({"error": self.kind(), "message": self.to_string()}).to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

/// Reads a file and records its digest in the manifest.
pub fn read_input(m: &mut RunManifest, name: &str, path: &str) -> CliResult<String> {
    let text = read(path)?;
    m.input(name, text.as_bytes());
    Ok(text)
}

pub fn load_space(m: &mut RunManifest, path: &str) -> CliResult<FiniteSpace> {
    Ok(space_from_json(&read_input(m, "space", path)?)?)
}

pub fn load_map(m: &mut RunManifest, path: &str, ambient: Option<&FiniteSpace>) -> CliResult<FiniteMap> {
    Ok(map_from_json(&read_input(m, "map", path)?, ambient)?)
}

pub fn load_copres(m: &mut RunManifest, name: &str, path: &str) -> CliResult<Copresentation> {
    Ok(copres_from_json(&read_input(m, name, path)?)?)
}

pub fn load_posite(m: &mut RunManifest, path: &str) -> CliResult<Posite> {
    Ok(posite_from_json(&read_input(m, "posite", path)?)?)
}

pub fn parse_json(text: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| qpolis::error::Error::Schema(e.to_string()).into())
}

/// Comma-separated point labels as a bit-set.
pub fn label_set(space: &FiniteSpace, list: &str) -> CliResult<u64> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).try_fold(0u64, |m, l| {
        let x = space.index_of(l).ok_or_else(|| qpolis::error::Error::Schema(format!("unknown point {l:?}")))?;
        Ok(m | 1 << x)
    })
}

pub fn labels(space: &FiniteSpace, set: u64) -> Vec<String> {
    qpolis::bits::bits(set).map(|x| space.label(x).to_string()).collect()
}

/// Prints `{"manifest": ..., <result fields>}` and passes `passed` through.
pub fn report(mut m: RunManifest, passed: bool, result: Value) -> CliResult<bool> {
    m.outcome = Some(qpolis::verify::Outcome { assertions: 1, failed: usize::from(!passed), passed });
    let mut out = json!({"manifest": m, "passed": passed});
    if let (Some(o), Value::Object(r)) = (out.as_object_mut(), result) {
        o.extend(r);
    }
    emit(&serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(passed)
}

/// Prints an artifact as it is.
pub fn artifact(text: &str) -> CliResult<bool> {
    emit(text);
    Ok(true)
}

/// Writes a line to stdout; a closed pipe is not an error.
pub fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}
