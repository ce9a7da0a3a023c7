//! Batch manifest: one JSON document listing the clips a command operates on.
//!
//! Relative clip paths resolve against the manifest's own directory, but the
//! path string is echoed verbatim in every output so reports stay identical
//! when a run is relocated.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use evmforge_core::detect::Split;
use evmforge_core::Roi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum ManifestLabel {
    #[serde(rename = "REAL")]
    Real,
    #[serde(rename = "FAKE")]
    Fake,
    #[default]
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

impl ManifestLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ManifestLabel::Real => "REAL",
            ManifestLabel::Fake => "FAKE",
            ManifestLabel::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub path: String,
    #[serde(default)]
    pub label: ManifestLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi: Option<Roi>,
    #[serde(default)]
    pub split: Split,
}

impl ManifestEntry {
    pub fn resolve(&self, base: &Path) -> PathBuf {
        let p = Path::new(&self.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

/// Load and validate a manifest, returning it with the directory clip paths
/// resolve against.
pub fn load_manifest(path: &Path) -> anyhow::Result<(Manifest, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .with_context(|| format!("malformed manifest {}", path.display()))?;

    if manifest.entries.is_empty() {
        bail!("manifest {} lists no clips", path.display());
    }
    let mut seen = std::collections::HashSet::new();
    for entry in &manifest.entries {
        let id = &entry.clip_id;
        if id.is_empty() || id.contains([',', '\n', '\r', '"', '/']) {
            bail!("clip_id {id:?} is empty or contains a reserved character");
        }
        if !seen.insert(id) {
            bail!("duplicate clip_id {id:?} in manifest");
        }
        if entry.path.is_empty() {
            bail!("clip {id:?} has an empty path");
        }
    }
    let base = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((manifest, base))
}
