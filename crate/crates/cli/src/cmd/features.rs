use std::path::PathBuf;

use evmforge_core::evm::magnify;
use evmforge_core::ssim::{features, ssim_series, FeatureVector, SourceTag, SsimSeries};

use crate::args::{BatchArgs, MagArgs, SsimArgs};
use crate::emit::{fmt_f64, write_csv};
use crate::manifest::load_manifest;
use crate::run::{report_failures, run_clips};

/// SSIM series and summary features for each clip, on both the original
/// frames and an in-memory magnified copy.
#[derive(Debug, clap::Args)]
pub struct FeaturesCmd {
    /// Clip manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,

    /// Directory receiving features.csv and ssim_series.csv.
    #[arg(long)]
    out_dir: PathBuf,

    #[command(flatten)]
    mag: MagArgs,

    #[command(flatten)]
    ssim: SsimArgs,

    #[command(flatten)]
    batch: BatchArgs,
}

struct ClipTracks {
    original_series: SsimSeries,
    evm_series: SsimSeries,
    original: FeatureVector,
    evm: FeatureVector,
}

impl FeaturesCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let (manifest, base) = load_manifest(&self.manifest)?;
        let band = self.mag.band()?;
        if self.ssim.window < 2 || self.ssim.stride < 1 {
            anyhow::bail!("--window must be >= 2 and --stride >= 1");
        }
        let params = self.ssim.params();

        let results = run_clips(&manifest, self.batch.jobs, |entry| {
            let seq = super::load_entry_clip(entry, &base, self.batch.fps)?;
            let original_series = ssim_series(&seq, &params)?;

            let magnified = magnify(&seq, &self.mag.params(band, seq.width(), seq.height()))?;
            let mut evm_series = ssim_series(&magnified, &params)?;
            evm_series.source = SourceTag::Evm;

            Ok(ClipTracks {
                original: features(&original_series)?,
                evm: features(&evm_series)?,
                original_series,
                evm_series,
            })
        })?;

        let mut feature_rows = Vec::new();
        let mut series_rows = Vec::new();
        for (entry, result) in manifest.entries.iter().zip(&results) {
            let Ok(tracks) = result else { continue };
            let label = entry.label.as_str();
            feature_rows.push(super::feature_row(
                &entry.clip_id,
                "ORIGINAL",
                &tracks.original,
                label,
            ));
            feature_rows.push(super::feature_row(
                &entry.clip_id,
                "EVM",
                &tracks.evm,
                label,
            ));
            for (source, series) in [
                ("ORIGINAL", &tracks.original_series),
                ("EVM", &tracks.evm_series),
            ] {
                for (i, &value) in series.values.iter().enumerate() {
                    series_rows.push(format!("{},{source},{i},{}", entry.clip_id, fmt_f64(value)));
                }
            }
        }
        write_csv(
            &self.out_dir.join("features.csv"),
            &super::features_header(),
            &feature_rows,
        )?;
        write_csv(
            &self.out_dir.join("ssim_series.csv"),
            super::SSIM_SERIES_HEADER,
            &series_rows,
        )?;

        Ok(report_failures(&manifest, &results))
    }
}
