use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use dirac_minmax::{Constants64, ScanRecord};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsUsed {
    pub alpha: f64,
    pub c: f64,
    pub m: f64,
}

/// Provenance attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub constants_used: ConstantsUsed,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, constants: &Constants64) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            constants_used: ConstantsUsed {
                alpha: constants.alpha(),
                c: constants.c(),
                m: constants.m(),
            },
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

/// `SOURCE_DATE_EPOCH` when set, the wall clock otherwise.
fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    pinned.unwrap_or_else(Utc::now).to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// 15 significant digits, printed in the shortest form that reads back to
/// the rounded value; scientific notation outside `[1e−5, 1e15)`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let mag = rounded.abs();
    if (1e-5..1e15).contains(&mag) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(row.into_iter().map(format_number)).map_err(CliError::io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn records_csv<R: ScanRecord<f64>>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    csv_bytes(R::header(), rows.iter().map(ScanRecord::fields))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(CliError::io)?;
    tmp.write_all(bytes).map_err(CliError::io)?;
    tmp.as_file().sync_all().map_err(CliError::io)?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn to_json<S: Serialize>(value: &S) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Emits a CSV file with its companion manifest, or the CSV on stdout with
/// the manifest on stderr.
pub fn emit_csv(out: Option<&Path>, bytes: &[u8], manifest: &RunManifest) -> Result<(), CliError> {
    let json = to_json(manifest)?;
    match out {
        Some(path) => {
            write_atomic(path, bytes)?;
            write_atomic(&manifest_path(path), &json)?;
        }
        None => {
            std::io::stdout().write_all(bytes).map_err(CliError::io)?;
            std::io::stderr().write_all(&json).map_err(CliError::io)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    #[serde(flatten)]
    result: &'a R,
    manifest: &'a RunManifest,
}

/// Emits a JSON document with the manifest embedded under `"manifest"`.
pub fn emit_json<R: Serialize>(out: Option<&Path>, result: &R, manifest: &RunManifest) -> Result<(), CliError> {
    let bytes = to_json(&Document { result, manifest })?;
    match out {
        Some(path) => write_atomic(path, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(CliError::io),
    }
}
