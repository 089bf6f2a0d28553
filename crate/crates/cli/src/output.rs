//! Atomic file output, CSV formatting and the run manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Name of the manifest written into the output directory.
pub const MANIFEST: &str = "manifest.json";

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Float with 17 significant digits and `.` as decimal separator.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a header row.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// One output file with its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

/// Outputs of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub point: String,
    pub params: serde_json::Value,
    pub files: Vec<FileEntry>,
}

/// Structured report of a failed sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub point: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub outputs: Vec<PointEntry>,
    pub errors: Vec<PointError>,
}

impl Manifest {
    /// Previous manifest in `dir`, if readable.
    pub fn load(dir: &Path) -> Option<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Entry for `point` whose parameters match and whose files are intact.
    pub fn reusable(
        &self,
        dir: &Path,
        point: &str,
        params: &serde_json::Value,
    ) -> Option<PointEntry> {
        let e = self
            .outputs
            .iter()
            .find(|e| e.point == point && &e.params == params)?;
        e.files
            .iter()
            .all(|f| {
                fs::read(dir.join(&f.path))
                    .map(|b| sha256_hex(&b) == f.sha256)
                    .unwrap_or(false)
            })
            .then(|| e.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_have_seventeen_digits() {
        assert_eq!(csv_float(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_float(-2.5), "-2.5000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(csv_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
