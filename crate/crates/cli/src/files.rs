use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use omnidepth_core::calibration::Extrinsics;
use omnidepth_core::io::{decode_raster, write_atomic};
use omnidepth_core::raster::LabelMap;
use serde::Serialize;

/// Bad invocation: exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Numerical failure such as a non-converged fit: exit code 3.
#[derive(Debug)]
pub struct NumericalError(pub String);

impl fmt::Display for NumericalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalError {}

pub fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(path, s.as_bytes())
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub fn read_raster(path: &Path) -> Result<LabelMap> {
    decode_raster(&read(path)?).with_context(|| format!("decoding {}", path.display()))
}

/// Files in `dir` with one of `extensions`, sorted by file name.
pub fn list_files(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && extensions.contains(&ext) {
            out.push(path);
        }
    }
    out.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(out)
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Bare extrinsics, or any JSON object holding them under `extrinsics`
/// (such as a calibration report).
pub fn read_extrinsics(path: &Path) -> Result<Extrinsics> {
    let bytes = read(path)?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    let inner = value.get("extrinsics").cloned().unwrap_or(value);
    let e: Extrinsics = serde_json::from_value(inner)
        .with_context(|| format!("{} holds no extrinsics", path.display()))?;
    Ok(Extrinsics::new(e.rotation, e.translation))
}

/// `<stem> <tag>` per line, `#` comments allowed.
pub fn parse_tags(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| {
            let l = l.split('#').next()?.trim();
            let mut it = l.split_whitespace();
            Some((it.next()?.to_string(), it.next()?.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags() {
        let t = parse_tags("# scenes\nf0 indoor\nf1 night_outdoor # late\n\nbroken\n");
        assert_eq!(t.len(), 2);
        assert_eq!(t["f1"], "night_outdoor");
    }

    #[test]
    fn extrinsics_from_report_or_bare() {
        let dir = tempfile::tempdir().unwrap();
        let bare = dir.path().join("e.json");
        std::fs::write(&bare, r#"{"rotation":[0,0,0],"translation":[0,0,-0.45]}"#).unwrap();
        assert_eq!(read_extrinsics(&bare).unwrap().translation.z, -0.45);
        let rep = dir.path().join("r.json");
        std::fs::write(
            &rep,
            r#"{"total_error":0,"extrinsics":{"rotation":[0,0,0.1],"translation":[1,2,3]}}"#,
        )
        .unwrap();
        assert_eq!(read_extrinsics(&rep).unwrap().translation.y, 2.0);
        std::fs::write(&rep, "{}").unwrap();
        assert!(read_extrinsics(&rep).is_err());
    }

    #[test]
    fn listing_is_sorted_and_filtered() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["b.omdr", "a.omdr", "c.txt", "tags.txt"] {
            std::fs::write(dir.path().join(n), b"").unwrap();
        }
        let l = list_files(dir.path(), &["omdr"]).unwrap();
        assert_eq!(
            l.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
            ["a.omdr", "b.omdr"]
        );
    }
}
