use std::path::PathBuf;

use evmforge_core::ssim::ssim_series;

use crate::args::{BatchArgs, SsimArgs};
use crate::emit::{fmt_f64, write_csv};
use crate::manifest::load_manifest;
use crate::run::{report_failures, run_clips};

/// Adjacent-frame SSIM series for every manifest clip, as received.
#[derive(Debug, clap::Args)]
pub struct SsimCmd {
    /// Clip manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    ssim: SsimArgs,

    #[command(flatten)]
    batch: BatchArgs,
}

impl SsimCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let (manifest, base) = load_manifest(&self.manifest)?;
        if self.ssim.window < 2 || self.ssim.stride < 1 {
            anyhow::bail!("--window must be >= 2 and --stride >= 1");
        }
        let params = self.ssim.params();

        let results = run_clips(&manifest, self.batch.jobs, |entry| {
            let seq = super::load_entry_clip(entry, &base, self.batch.fps)?;
            Ok(ssim_series(&seq, &params)?)
        })?;

        let mut rows = Vec::new();
        for (entry, result) in manifest.entries.iter().zip(&results) {
            if let Ok(series) = result {
                for (i, &value) in series.values.iter().enumerate() {
                    rows.push(format!("{},ORIGINAL,{i},{}", entry.clip_id, fmt_f64(value)));
                }
            }
        }
        write_csv(&self.out, super::SSIM_SERIES_HEADER, &rows)?;

        Ok(report_failures(&manifest, &results))
    }
}
