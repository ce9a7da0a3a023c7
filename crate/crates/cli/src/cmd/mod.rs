//! Subcommand implementations. Each `run` returns the number of failed
//! clips; configuration problems surface as errors instead.

mod eval;
mod features;
mod magnify;
mod pulse;
mod ssim;
mod sweep;
mod synth;
mod train;

pub use eval::EvalCmd;
pub use features::FeaturesCmd;
pub use magnify::MagnifyCmd;
pub use pulse::PulseCmd;
pub use ssim::SsimCmd;
pub use sweep::SweepCmd;
pub use synth::SynthCmd;
pub use train::TrainCmd;

use std::path::Path;

use anyhow::Context;
use evmforge_core::detect::ClipRecord;
use evmforge_core::io::load_frames;
use evmforge_core::ssim::{FeatureVector, FEATURE_NAMES};
use evmforge_core::FrameSequence;

use crate::args::SourceArg;
use crate::emit::fmt_f64;
use crate::manifest::{load_manifest, ManifestEntry};

pub(crate) fn load_entry_clip(
    entry: &ManifestEntry,
    base: &Path,
    fps: f64,
) -> anyhow::Result<FrameSequence> {
    let seq = load_frames(&entry.resolve(base), fps)?;
    match entry.roi {
        Some(roi) => Ok(seq.crop(roi)?),
        None => Ok(seq),
    }
}

pub(crate) fn features_header() -> String {
    format!("clip_id,source,{},label", FEATURE_NAMES.join(","))
}

pub(crate) fn feature_row(
    clip_id: &str,
    source: &str,
    features: &FeatureVector,
    label: &str,
) -> String {
    let values = features
        .to_array()
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(",");
    format!("{clip_id},{source},{values},{label}")
}

pub(crate) const SSIM_SERIES_HEADER: &str = "clip_id,source,frame_index,ssim";

pub(crate) const METRICS_CSV_HEADER: &str =
    "model,accuracy,cross_entropy_loss,precision,recall,f1,tp,fn,fp,tn";

pub(crate) fn metrics_csv_row(model: &str, m: &evmforge_core::detect::Metrics) -> String {
    format!(
        "{model},{},{},{},{},{},{},{},{},{}",
        fmt_f64(m.accuracy),
        fmt_f64(m.cross_entropy_loss),
        fmt_f64(m.precision),
        fmt_f64(m.recall),
        fmt_f64(m.f1),
        m.confusion.true_positive,
        m.confusion.false_negative,
        m.confusion.false_positive,
        m.confusion.true_negative,
    )
}

/// Read a features table back into classifier records, taking each clip's
/// TRAIN/TEST assignment from the manifest. Rows from the other source track
/// are dropped; UNKNOWN-labelled rows are skipped with a warning since they
/// carry no training signal.
pub(crate) fn load_records(
    features_path: &Path,
    manifest_path: &Path,
    source: SourceArg,
) -> anyhow::Result<Vec<ClipRecord>> {
    let (manifest, _) = load_manifest(manifest_path)?;
    let splits: std::collections::HashMap<&str, evmforge_core::detect::Split> = manifest
        .entries
        .iter()
        .map(|e| (e.clip_id.as_str(), e.split))
        .collect();

    let text = std::fs::read_to_string(features_path)
        .with_context(|| format!("cannot read features table {}", features_path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let expected = features_header();
    if header != expected {
        anyhow::bail!(
            "features table {} has header {header:?}, expected {expected:?}",
            features_path.display()
        );
    }

    let mut records = Vec::new();
    let mut skipped = 0usize;
    for (lineno, line) in lines.enumerate() {
        let n = lineno + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            anyhow::bail!("line {n}: expected 10 columns, found {}", fields.len());
        }
        if fields[1] != source.as_str() {
            continue;
        }
        let label = match fields[9] {
            "REAL" => evmforge_core::detect::Label::Real,
            "FAKE" => evmforge_core::detect::Label::Fake,
            "UNKNOWN" => {
                skipped += 1;
                continue;
            }
            other => anyhow::bail!("line {n}: unknown label {other:?}"),
        };
        let mut values = [0.0f64; 7];
        for (slot, field) in values.iter_mut().zip(&fields[2..9]) {
            *slot = field
                .parse()
                .with_context(|| format!("line {n}: bad feature value {field:?}"))?;
        }
        let clip_id = fields[0].to_string();
        let split = *splits
            .get(clip_id.as_str())
            .with_context(|| format!("line {n}: clip {clip_id:?} is not in the manifest"))?;
        records.push(ClipRecord {
            clip_id,
            label,
            features: FeatureVector::from_array(values),
            split,
        });
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} UNKNOWN-labelled rows");
    }
    if records.is_empty() {
        anyhow::bail!(
            "no usable {} rows in {}",
            source.as_str(),
            features_path.display()
        );
    }
    Ok(records)
}
