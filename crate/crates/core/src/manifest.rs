//! Dataset manifests: one `relative/path,label` pair per line.
//!
//! Paths resolve against the manifest's own directory. `#` starts a comment
//! line; blank lines are ignored. The label may be omitted for inputs that
//! are only extracted or detected.

use std::fs;
use std::path::{Path, PathBuf};

use crate::classifier::Label;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("manifest line {line}: label required")]
    MissingLabel { line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Option<Label>,
    /// 1-based line number in the manifest.
    pub line: usize,
}

pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (path, label) = match trimmed.rsplit_once(',') {
            Some((p, l)) => {
                let l = l.trim();
                let label = l
                    .parse::<u8>()
                    .ok()
                    .and_then(Label::from_u8)
                    .ok_or_else(|| ManifestError::Syntax {
                        line,
                        reason: format!("label must be 0 or 1, got {l:?}"),
                    })?;
                (p.trim(), Some(label))
            }
            None => (trimmed, None),
        };
        if path.is_empty() {
            return Err(ManifestError::Syntax {
                line,
                reason: "empty path".into(),
            });
        }
        entries.push(ManifestEntry {
            path: base_dir.join(path),
            label,
            line,
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_owned(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

/// Like [`read_manifest`] but every entry must carry a label.
pub fn read_labeled_manifest(path: &Path) -> Result<Vec<(PathBuf, Label)>, ManifestError> {
    read_manifest(path)?
        .into_iter()
        .map(|e| match e.label {
            Some(l) => Ok((e.path, l)),
            None => Err(ManifestError::MissingLabel { line: e.line }),
        })
        .collect()
}
