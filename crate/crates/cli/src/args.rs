//! Flag groups shared by several subcommands.

use clap::{Args, ValueEnum};

use evmforge_core::evm::{MagMode, MagParams};
use evmforge_core::io::FrameFormat;
use evmforge_core::pulse::Channel;
use evmforge_core::pyramid::default_depth;
use evmforge_core::ssim::SsimParams;
use evmforge_core::tfilter::BandSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Color,
    Motion,
}

impl From<ModeArg> for MagMode {
    fn from(m: ModeArg) -> MagMode {
        match m {
            ModeArg::Color => MagMode::Color,
            ModeArg::Motion => MagMode::Motion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Png,
    Y4m,
}

impl From<FormatArg> for FrameFormat {
    fn from(f: FormatArg) -> FrameFormat {
        match f {
            FormatArg::Png => FrameFormat::PngSequence,
            FormatArg::Y4m => FrameFormat::Y4m,
        }
    }
}

impl FormatArg {
    /// Path a clip's frames land at under `dir`.
    pub fn clip_path(self, dir: &std::path::Path, clip_id: &str) -> std::path::PathBuf {
        match self {
            FormatArg::Png => dir.join(clip_id),
            FormatArg::Y4m => dir.join(format!("{clip_id}.y4m")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    R,
    G,
    B,
    Y,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Channel {
        match c {
            ChannelArg::R => Channel::R,
            ChannelArg::G => Channel::G,
            ChannelArg::B => Channel::B,
            ChannelArg::Y => Channel::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Original,
    Evm,
}

impl SourceArg {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceArg::Original => "ORIGINAL",
            SourceArg::Evm => "EVM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Logistic,
    Tree,
    Both,
}

/// Magnification flags. The band defaults to the blood-flow range used for
/// color amplification.
#[derive(Debug, Args)]
pub struct MagArgs {
    /// Amplification factor.
    #[arg(long, default_value_t = 50.0)]
    pub alpha: f64,

    /// Lower temporal band edge in Hz.
    #[arg(long, default_value_t = 0.8)]
    pub f_lo: f64,

    /// Upper temporal band edge in Hz.
    #[arg(long, default_value_t = 1.0)]
    pub f_hi: f64,

    /// What to amplify: color (intensity) or motion (detail bands).
    #[arg(long, value_enum, default_value_t = ModeArg::Color)]
    pub mode: ModeArg,

    /// Pyramid depth; derived from the frame size when omitted.
    #[arg(long)]
    pub depth: Option<usize>,

    /// Extra attenuation on chroma amplification, in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub chroma_atten: f64,

    /// Enable per-level alpha derating in motion mode (spatial wavelength in
    /// pixels).
    #[arg(long)]
    pub lambda_cutoff: Option<f64>,
}

impl MagArgs {
    /// Validate the clip-independent parts up front so mistakes become
    /// configuration errors, not per-clip failures.
    pub fn band(&self) -> anyhow::Result<BandSpec> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            anyhow::bail!("--alpha must be >= 0, got {}", self.alpha);
        }
        if !(0.0..=1.0).contains(&self.chroma_atten) {
            anyhow::bail!(
                "--chroma-atten must lie in [0, 1], got {}",
                self.chroma_atten
            );
        }
        Ok(BandSpec::new(self.f_lo, self.f_hi)?)
    }

    pub fn params(&self, band: BandSpec, width: usize, height: usize) -> MagParams {
        self.params_with_alpha(band, self.alpha, width, height)
    }

    pub fn params_with_alpha(
        &self,
        band: BandSpec,
        alpha: f64,
        width: usize,
        height: usize,
    ) -> MagParams {
        MagParams {
            mode: self.mode.into(),
            alpha,
            band,
            depth: self.depth.unwrap_or_else(|| default_depth(width, height)),
            chroma_atten: self.chroma_atten,
            lambda_cutoff: self.lambda_cutoff,
        }
    }
}

#[derive(Debug, Args)]
pub struct SsimArgs {
    /// Square comparison window size in pixels.
    #[arg(long, default_value_t = 8)]
    pub window: usize,

    /// Window step in pixels.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

impl SsimArgs {
    pub fn params(&self) -> SsimParams {
        SsimParams {
            window: self.window,
            stride: self.stride,
            ..SsimParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// Frame rate assumed for PNG directories (y4m streams carry their own).
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,

    /// Cap on concurrently processed clips; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}
