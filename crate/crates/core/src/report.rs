//! Verification reports and their CSV / file serialization.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Outcome of checking one inequality or identity on sampled data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub passed: bool,
    /// Precondition not met; the case was not evaluated and does not count
    /// as a failure.
    pub skipped: bool,
    /// Headline measured quantity, usually the worst slack.
    pub value: f64,
    pub tolerance: f64,
    pub iters: usize,
    /// Further named measurements, in insertion order.
    pub details: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, passed: bool, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed,
            skipped: false,
            value,
            tolerance,
            iters: 0,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut r = Self::new(name, true, 0.0, 0.0);
        r.skipped = true;
        r.notes.push(reason.into());
        r
    }

    pub fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.push((key.into(), value));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn csv_row(&self) -> String {
        csv_row(&self.name, self.value, self.tolerance, self.passed, self.iters)
    }
}

pub const CSV_HEADER: &str = "name,value,tolerance,passed,iters";

pub fn csv_row(name: &str, value: f64, tolerance: f64, passed: bool, iters: usize) -> String {
    format!("{},{value:e},{tolerance:e},{passed},{iters}", csv_escape(name))
}

pub(crate) fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{file_name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
