use std::path::PathBuf;

use evmforge_core::evm::{magnify, MagMode, MagParams};
use evmforge_core::pulse::{compare_pulse, estimate_bpm, mean_series, PulseEstimate};
use evmforge_core::pyramid::default_depth;
use evmforge_core::tfilter::BandSpec;
use evmforge_core::{Error, Roi};

use crate::args::{BatchArgs, ChannelArg};
use crate::emit::{fmt_f64, write_csv};
use crate::manifest::{load_manifest, ManifestLabel};
use crate::run::{report_failures, run_clips};

/// Estimate each clip's pulse rate from periodic color variation.
#[derive(Debug, clap::Args)]
pub struct PulseCmd {
    /// Clip manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,

    /// Directory receiving pulse.csv and pulse_delta.csv.
    #[arg(long)]
    out_dir: PathBuf,

    /// Lower edge of the heart-rate search band in Hz.
    #[arg(long, default_value_t = 1.0)]
    f_lo: f64,

    /// Upper edge of the heart-rate search band in Hz.
    #[arg(long, default_value_t = 1.33)]
    f_hi: f64,

    /// Color-magnify the clip in the same band before estimating.
    #[arg(long)]
    magnify: bool,

    /// Amplification factor when --magnify is set.
    #[arg(long, default_value_t = 50.0)]
    alpha: f64,

    /// Pyramid depth for magnification; derived from frame size when omitted.
    #[arg(long)]
    depth: Option<usize>,

    /// Chroma attenuation for magnification, in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    chroma_atten: f64,

    /// Channel averaged into the pulse series; Y after magnification,
    /// G otherwise.
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,

    /// Also write spectrum_<clip_id>.csv with the padded half spectrum.
    #[arg(long)]
    spectrum: bool,

    #[command(flatten)]
    batch: BatchArgs,
}

impl PulseCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let (manifest, base) = load_manifest(&self.manifest)?;
        let band = BandSpec::new(self.f_lo, self.f_hi)?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            anyhow::bail!("--alpha must be >= 0, got {}", self.alpha);
        }
        if !(0.0..=1.0).contains(&self.chroma_atten) {
            anyhow::bail!(
                "--chroma-atten must lie in [0, 1], got {}",
                self.chroma_atten
            );
        }
        let channel = self
            .channel
            .unwrap_or(if self.magnify {
                ChannelArg::Y
            } else {
                ChannelArg::G
            })
            .into();

        // None marks a clip whose band held no peak; a legitimate outcome,
        // not a failure
        let results = run_clips(&manifest, self.batch.jobs, |entry| {
            let mut seq = super::load_entry_clip(entry, &base, self.batch.fps)?;
            if self.magnify {
                let params = MagParams {
                    mode: MagMode::Color,
                    alpha: self.alpha,
                    band,
                    depth: self
                        .depth
                        .unwrap_or_else(|| default_depth(seq.width(), seq.height())),
                    chroma_atten: self.chroma_atten,
                    lambda_cutoff: None,
                };
                seq = magnify(&seq, &params)?;
            }
            let roi = Roi::new(0, 0, seq.width(), seq.height());
            let series = mean_series(&seq, roi, channel)?;
            let estimate: Option<PulseEstimate> = match estimate_bpm(&series, &band) {
                Ok(est) => Some(est),
                Err(Error::NoPeak) => None,
                Err(e) => return Err(e.into()),
            };
            if self.spectrum {
                if let Some(est) = &estimate {
                    let rows: Vec<String> = est
                        .spectrum
                        .iter()
                        .map(|&(freq, mag)| format!("{},{}", fmt_f64(freq), fmt_f64(mag)))
                        .collect();
                    crate::emit::write_csv(
                        &self.out_dir.join(format!("spectrum_{}.csv", entry.clip_id)),
                        "frequency_hz,magnitude",
                        &rows,
                    )?;
                }
            }
            Ok(estimate)
        })?;

        let mut rows = Vec::new();
        for (entry, result) in manifest.entries.iter().zip(&results) {
            let label = entry.label.as_str();
            match result {
                Ok(Some(est)) => rows.push(format!(
                    "{},{label},ok,{},{},{}",
                    entry.clip_id,
                    fmt_f64(est.bpm),
                    fmt_f64(est.freq),
                    fmt_f64(est.peak_magnitude)
                )),
                Ok(None) => rows.push(format!("{},{label},no_peak,,,", entry.clip_id)),
                Err(_) => {}
            }
        }
        write_csv(
            &self.out_dir.join("pulse.csv"),
            "clip_id,label,status,bpm,freq_hz,peak_magnitude",
            &rows,
        )?;

        // pair the k-th REAL clip with the k-th FAKE clip, manifest order
        let with_label = |want: ManifestLabel| -> Vec<(&str, &PulseEstimate)> {
            manifest
                .entries
                .iter()
                .zip(&results)
                .filter(|(e, _)| e.label == want)
                .filter_map(|(e, r)| match r {
                    Ok(Some(est)) => Some((e.clip_id.as_str(), est)),
                    _ => None,
                })
                .collect()
        };
        let delta_rows: Vec<String> = with_label(ManifestLabel::Real)
            .iter()
            .zip(&with_label(ManifestLabel::Fake))
            .map(|((real_id, real_est), (fake_id, fake_est))| {
                format!(
                    "{real_id},{fake_id},{}",
                    fmt_f64(compare_pulse(real_est, fake_est))
                )
            })
            .collect();
        write_csv(
            &self.out_dir.join("pulse_delta.csv"),
            "real_clip_id,fake_clip_id,delta_bpm",
            &delta_rows,
        )?;

        Ok(report_failures(&manifest, &results))
    }
}
