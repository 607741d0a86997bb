//! File formats and output helpers: 17-significant-digit float printing,
//! atomic writes, and content hashing for provenance.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dynamics::CollisionRecord;
use crate::geometry::TableSpec;
use crate::Real;

/// Format a float with 17 significant digits (round-trips f64 exactly).
pub fn float17(x: Real) -> String {
    format!("{x:.16e}")
}

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Hex-encoded SHA-256 of a table's canonical JSON serialization.
pub fn table_hash(spec: &TableSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("table spec serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Header of the trajectory dump.
pub const TRAJECTORY_HEADER: &str = "n,s,phi,c,tau,t,eta";

/// Render one collision row.
pub fn trajectory_row(rec: &CollisionRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        rec.n,
        float17(rec.s),
        float17(rec.phi),
        float17(rec.c),
        float17(rec.tau),
        float17(rec.t),
        float17(rec.eta)
    )
}
