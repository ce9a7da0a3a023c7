use std::path::PathBuf;

use evmforge_core::evm::magnify;
use evmforge_core::io::write_frames;
use evmforge_core::ssim::ssim_pair;

use crate::args::{BatchArgs, FormatArg, MagArgs, ModeArg, SsimArgs};
use crate::emit::{fmt_f64, write_csv};
use crate::manifest::load_manifest;
use crate::run::{report_failures, run_clips};

/// Magnify every clip at several amplification factors; one output directory
/// per alpha plus a summary table scoring how far each output drifts from its
/// input (mean frame-wise SSIM against the original, lower = noisier).
#[derive(Debug, clap::Args)]
pub struct SweepCmd {
    /// Clip manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,

    /// Directory receiving alpha_<a>/ subdirectories and sweep_summary.csv.
    #[arg(long)]
    out_dir: PathBuf,

    /// Amplification factors to render, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 20.0, 30.0, 40.0, 50.0])]
    alphas: Vec<f64>,

    /// Lower temporal band edge in Hz.
    #[arg(long, default_value_t = 0.8)]
    f_lo: f64,

    /// Upper temporal band edge in Hz.
    #[arg(long, default_value_t = 1.0)]
    f_hi: f64,

    #[arg(long, value_enum, default_value_t = ModeArg::Color)]
    mode: ModeArg,

    /// Pyramid depth; derived from the frame size when omitted.
    #[arg(long)]
    depth: Option<usize>,

    /// Extra attenuation on chroma amplification, in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    chroma_atten: f64,

    /// Enable per-level alpha derating in motion mode.
    #[arg(long)]
    lambda_cutoff: Option<f64>,

    #[command(flatten)]
    ssim: SsimArgs,

    #[command(flatten)]
    batch: BatchArgs,

    #[arg(long, value_enum, default_value_t = FormatArg::Png)]
    format: FormatArg,
}

fn alpha_label(alpha: f64) -> String {
    if alpha == alpha.trunc() && alpha.abs() < 1e15 {
        format!("{alpha:.0}")
    } else {
        format!("{alpha}")
    }
}

impl SweepCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let (manifest, base) = load_manifest(&self.manifest)?;
        if self.alphas.is_empty() {
            anyhow::bail!("--alphas needs at least one value");
        }
        let mag = MagArgs {
            alpha: 0.0,
            f_lo: self.f_lo,
            f_hi: self.f_hi,
            mode: self.mode,
            depth: self.depth,
            chroma_atten: self.chroma_atten,
            lambda_cutoff: self.lambda_cutoff,
        };
        let band = mag.band()?;
        for &alpha in &self.alphas {
            if !(alpha.is_finite() && alpha >= 0.0) {
                anyhow::bail!("--alphas values must be >= 0, got {alpha}");
            }
        }
        if self.ssim.window < 2 || self.ssim.stride < 1 {
            anyhow::bail!("--window must be >= 2 and --stride >= 1");
        }
        let ssim_params = self.ssim.params();

        // per clip: mean frame-wise SSIM of output vs input, one value per
        // alpha; degradation shows up as the mean falling below 1
        let results = run_clips(&manifest, self.batch.jobs, |entry| {
            let seq = super::load_entry_clip(entry, &base, self.batch.fps)?;
            let mut means = Vec::with_capacity(self.alphas.len());
            for &alpha in &self.alphas {
                let params = mag.params_with_alpha(band, alpha, seq.width(), seq.height());
                let out = magnify(&seq, &params)?;
                let dir = self.out_dir.join(format!("alpha_{}", alpha_label(alpha)));
                write_frames(
                    &out,
                    &self.format.clip_path(&dir, &entry.clip_id),
                    self.format.into(),
                )?;
                let mut total = 0.0;
                for (original, magnified) in seq.frames.iter().zip(&out.frames) {
                    total += ssim_pair(original, magnified, &ssim_params)?;
                }
                means.push(total / seq.frames.len() as f64);
            }
            Ok(means)
        })?;

        let mut rows = Vec::new();
        for (k, &alpha) in self.alphas.iter().enumerate() {
            for (entry, result) in manifest.entries.iter().zip(&results) {
                if let Ok(means) = result {
                    rows.push(format!(
                        "{},{},{}",
                        alpha_label(alpha),
                        entry.clip_id,
                        fmt_f64(means[k])
                    ));
                }
            }
        }
        write_csv(
            &self.out_dir.join("sweep_summary.csv"),
            "alpha,clip_id,mean_ssim",
            &rows,
        )?;

        Ok(report_failures(&manifest, &results))
    }
}
