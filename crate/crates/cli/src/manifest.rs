use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub label: String,
    #[serde(default)]
    pub writer: Option<String>,
}

/// Reads a `path,label,writer` CSV. Relative paths are resolved against the
/// manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("path") || headers.get(1) != Some("label") {
        bail!("{}: header must be `path,label,writer`", path.display());
    }
    let mut rows = Vec::new();
    for (n, rec) in reader.deserialize::<ManifestRow>().enumerate() {
        let mut row = rec.with_context(|| format!("{}: row {}", path.display(), n + 2))?;
        if row.label.trim().is_empty() {
            bail!("{}: row {} has an empty label", path.display(), n + 2);
        }
        if row.writer.as_deref() == Some("") {
            row.writer = None;
        }
        if row.path.is_relative() {
            row.path = base.join(&row.path);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Serialises rows with paths relative to `dir` where possible.
pub fn manifest_bytes(rows: &[ManifestRow], dir: &Path) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "label", "writer"])?;
    for r in rows {
        let p = r.path.strip_prefix(dir).unwrap_or(&r.path);
        w.write_record([p.to_string_lossy().as_ref(), r.label.as_str(), r.writer.as_deref().unwrap_or("")])?;
    }
    Ok(w.into_inner()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(&m, "path,label,writer\na.png,x,w1\n/abs/b.png,\"y,z\",\n").unwrap();
        let rows = read_manifest(&m).unwrap();
        assert_eq!(rows[0].path, dir.path().join("a.png"));
        assert_eq!(rows[0].writer.as_deref(), Some("w1"));
        assert_eq!(rows[1].path, PathBuf::from("/abs/b.png"));
        assert_eq!((rows[1].label.as_str(), rows[1].writer.as_deref()), ("y,z", None));
        std::fs::write(&m, manifest_bytes(&rows, dir.path()).unwrap()).unwrap();
        assert_eq!(read_manifest(&m).unwrap(), rows);
    }

    #[test]
    fn rejects_bad_headers_and_empty_labels() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(&m, "file,label\na.png,x\n").unwrap();
        assert!(read_manifest(&m).is_err());
        std::fs::write(&m, "path,label,writer\na.png, ,\n").unwrap();
        assert!(read_manifest(&m).unwrap_err().to_string().contains("empty label"));
        assert!(read_manifest(&dir.path().join("missing.csv")).is_err());
    }
}
