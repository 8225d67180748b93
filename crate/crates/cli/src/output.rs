//! Atomic output writing and golden-directory comparison. Every file is
//! written to a temporary sibling and renamed into place, and nothing is
//! written until a command's computation has finished.

use cplab::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

/// Buffered outputs of one command, flushed atomically at the end.
pub struct OutputSet {
    out_dir: PathBuf,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(out_dir: &Path) -> Self {
        OutputSet {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, rel: &str, bytes: Vec<u8>) {
        self.files.push((PathBuf::from(rel), bytes));
    }

    pub fn add_text(&mut self, rel: &str, text: String) {
        self.add(rel, text.into_bytes());
    }

    /// Writes every buffered file temp-then-rename.
    pub fn flush(&self) -> Result<()> {
        for (rel, bytes) in &self.files {
            let target = self.out_dir.join(rel);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            let tmp = target.with_extension("tmp");
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, &target)?;
        }
        Ok(())
    }

    /// Compares the buffered outputs against a golden directory byte-wise.
    /// Only `report.json` and `tables/` participate (artifacts can be large).
    pub fn compare_golden(&self, golden: &Path) -> Result<()> {
        let mut mismatches = Vec::new();
        for (rel, bytes) in &self.files {
            let name = rel.to_string_lossy();
            if name != "report.json" && !name.starts_with("tables/") {
                continue;
            }
            let golden_path = golden.join(rel);
            match fs::read(&golden_path) {
                Ok(expected) if expected == *bytes => {}
                Ok(_) => mismatches.push(format!("{name}: contents differ")),
                Err(e) => mismatches.push(format!("{name}: {e}")),
            }
        }
        if mismatches.is_empty() {
            Ok(())
        } else {
            Err(Error::Io(format!(
                "golden comparison failed: {}",
                mismatches.join("; ")
            )))
        }
    }
}

/// Exit-3 guard: any NaN among a command's headline numbers is a numeric
/// failure attributed to the named operation.
pub fn guard_numeric(op: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parameter(format!("NaN encountered in {op}")));
    }
    Ok(())
}
