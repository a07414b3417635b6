//! File formats: text and binary point clouds, correspondence lists, pose
//! lists, float rasters, 16-bit PNG depth, and the pipeline configuration.
//!
//! Every decoder has a byte-slice entry point that never panics on malformed
//! input.

mod cloud;
mod config;
mod raster;
mod text;

pub use cloud::*;
pub use config::*;
pub use raster::*;
pub use text::*;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub(crate) fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("not UTF-8 text: {e}")))
}

/// Splits a line into numeric fields, ignoring `#` comments. Returns `None`
/// for blank lines.
pub(crate) fn numeric_fields(raw: &str, line_no: usize) -> Result<Option<Vec<f64>>> {
    let line = raw.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, format!("not a finite number: {f:?}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}
