use std::path::PathBuf;

use clap::ValueEnum;
use evmforge_core::io::write_frames;
use evmforge_core::synth::{synth_clip, SynthKind, SynthParams};

use crate::args::FormatArg;
use crate::emit::write_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Static,
    SineBrightness,
    SineMotion,
    Glitch,
}

/// Generate a synthetic fixture clip.
#[derive(Debug, clap::Args)]
pub struct SynthCmd {
    /// Clip family.
    #[arg(long, value_enum)]
    kind: KindArg,

    /// Tone frequency in Hz (brightness and motion kinds).
    #[arg(long, default_value_t = 1.0)]
    freq: f64,

    /// Brightness tone amplitude.
    #[arg(long, default_value_t = 0.01)]
    amplitude: f64,

    /// Translation amplitude in pixels (motion kind).
    #[arg(long, default_value_t = 0.2)]
    amplitude_px: f64,

    /// Corrupted interior frames (glitch kind).
    #[arg(long, default_value_t = 1)]
    corrupted: usize,

    #[arg(long, default_value_t = 64)]
    width: usize,

    #[arg(long, default_value_t = 64)]
    height: usize,

    #[arg(long, default_value_t = 64)]
    frames: usize,

    #[arg(long, default_value_t = 30.0)]
    fps: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory (png) or file (y4m).
    #[arg(long)]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Png)]
    format: FormatArg,
}

#[derive(serde::Serialize)]
struct Sidecar<'a> {
    kind: &'a SynthKind,
    params: &'a SynthParams,
}

impl SynthCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let params = SynthParams {
            width: self.width,
            height: self.height,
            frames: self.frames,
            fps: self.fps,
            seed: self.seed,
        };
        let kind = match self.kind {
            KindArg::Static => SynthKind::Static,
            KindArg::SineBrightness => SynthKind::SineBrightness {
                freq_hz: self.freq,
                amplitude: self.amplitude,
            },
            KindArg::SineMotion => SynthKind::SineMotion {
                freq_hz: self.freq,
                amplitude_px: self.amplitude_px,
            },
            KindArg::Glitch => SynthKind::Glitch {
                corrupted: self.corrupted,
            },
        };
        let clip = synth_clip(&kind, &params)?;
        write_frames(&clip, &self.out, self.format.into())?;
        let sidecar_path = match self.format {
            FormatArg::Png => self.out.join("synth.json"),
            FormatArg::Y4m => self.out.with_extension("json"),
        };
        write_json(
            &sidecar_path,
            &Sidecar {
                kind: &kind,
                params: &params,
            },
        )?;
        log::info!(
            "wrote {} frames of {}x{} to {}",
            params.frames,
            params.width,
            params.height,
            self.out.display()
        );
        Ok(0)
    }
}
