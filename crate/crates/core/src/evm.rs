//! Eulerian magnification: amplify band-limited temporal variation.
//!
//! COLOR mode converts to YIQ, filters each sample's time series at the
//! coarsest Gaussian level, scales (chroma attenuated separately), expands
//! back to full resolution and adds. MOTION mode filters and amplifies every
//! Laplacian detail band in RGB and recollapses. Both clamp to `[0, 1]` only
//! at the final output.
//!
//! Filtering is batched level by level: one stack of `frames` samples per
//! position, filtered in parallel with one FFT plan shared across threads.
//! Every position is written independently, so results do not depend on the
//! parallel schedule.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{sequence_to_yiq, yiq_to_rgb, Colorspace, Frame, FrameSequence};
use crate::pyramid::{blur_downsample, build_laplacian, collapse, upsample};
use crate::tfilter::{BandSpec, IdealBandpassPlan};

/// Which temporal structure to amplify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MagMode {
    /// Blood-flow style intensity variation at the coarsest spatial scale.
    #[serde(rename = "color")]
    Color,
    /// Sub-pixel motion carried by the Laplacian detail bands.
    #[serde(rename = "motion")]
    Motion,
}

/// Magnification settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MagParams {
    pub mode: MagMode,
    /// Amplification factor, >= 0.
    pub alpha: f64,
    pub band: BandSpec,
    /// Pyramid depth (number of Gaussian levels).
    pub depth: usize,
    /// Extra factor on the I/Q (chroma) planes in COLOR mode, in `[0, 1]`.
    pub chroma_atten: f64,
    /// When set, MOTION mode derates alpha per level to
    /// `min(alpha, max(0, lambda_level / 8 - 1))` where
    /// `lambda_level = 2^(level + 2)` pixels. Off by default.
    pub lambda_cutoff: Option<f64>,
}

impl MagParams {
    pub fn new(mode: MagMode, alpha: f64, band: BandSpec, depth: usize) -> Self {
        MagParams {
            mode,
            alpha,
            band,
            depth,
            chroma_atten: 1.0,
            lambda_cutoff: None,
        }
    }

    fn validate(&self, seq: &FrameSequence) -> Result<()> {
        if seq.colorspace != Colorspace::Rgb {
            return Err(Error::ChannelMismatch(format!(
                "magnification expects an RGB sequence, got {:?}",
                seq.colorspace
            )));
        }
        if seq.len() < 4 {
            return Err(Error::TooFewFrames {
                len: seq.len(),
                min: 4,
            });
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.chroma_atten) {
            return Err(Error::InvalidParams(format!(
                "chroma_atten must lie in [0, 1], got {}",
                self.chroma_atten
            )));
        }
        self.band.check_nyquist(seq.fps)?;
        let min_dim = seq.width().min(seq.height());
        if self.depth < 1 || self.depth >= 64 || min_dim < (1usize << self.depth) {
            return Err(Error::DepthTooLarge {
                depth: self.depth,
                width: seq.width(),
                height: seq.height(),
            });
        }
        Ok(())
    }
}

fn level_alpha(alpha: f64, level: usize, lambda_cutoff: Option<f64>) -> f64 {
    match lambda_cutoff {
        None => alpha,
        Some(_) => {
            let lambda_level = (1u64 << (level + 2)) as f64;
            alpha.min((lambda_level / 8.0 - 1.0).max(0.0))
        }
    }
}

// Transpose frames into one contiguous row per sample position, filter every
// row in place with `plan`, scaling row `i` by `scale(i)`.
fn filter_stack(
    frames: &[Frame],
    plan: &IdealBandpassPlan,
    scale: impl Fn(usize) -> f64 + Sync,
) -> Vec<f64> {
    let t_len = frames.len();
    let s_len = frames[0].samples().len();
    let mut stack = vec![0.0; s_len * t_len];
    for (t, frame) in frames.iter().enumerate() {
        for (i, &v) in frame.samples().iter().enumerate() {
            stack[i * t_len + t] = v;
        }
    }
    stack.par_chunks_mut(t_len).enumerate().for_each_init(
        || plan.make_scratch(),
        |scratch, (i, row)| {
            plan.apply(row, scratch);
            let a = scale(i);
            for v in row {
                *v *= a;
            }
        },
    );
    stack
}

fn magnify_color(seq: &FrameSequence, params: &MagParams) -> Result<FrameSequence> {
    let yiq = sequence_to_yiq(seq)?;
    let t_len = yiq.len();

    // per-level dimensions, full resolution down to the coarsest level
    let mut dims = vec![(seq.width(), seq.height())];
    for k in 1..params.depth {
        let (w, h) = dims[k - 1];
        dims.push((w.div_ceil(2), h.div_ceil(2)));
    }

    let coarse: Vec<Frame> = yiq
        .frames
        .par_iter()
        .map(|frame| {
            let mut level = frame.clone();
            for _ in 1..params.depth {
                level = blur_downsample(&level)?;
            }
            Ok(level)
        })
        .collect::<Result<_>>()?;

    let plan = IdealBandpassPlan::new(t_len, seq.fps, &params.band)?;
    let plane = coarse[0].width() * coarse[0].height();
    let stack = filter_stack(&coarse, &plan, |i| {
        // planar layout: plane 0 is Y, planes 1 and 2 are chroma
        if i < plane {
            params.alpha
        } else {
            params.alpha * params.chroma_atten
        }
    });

    let frames: Vec<Frame> = yiq
        .frames
        .par_iter()
        .enumerate()
        .map(|(t, original)| {
            let (cw, ch) = dims[params.depth - 1];
            let samples: Vec<f64> = (0..coarse[t].samples().len())
                .map(|i| stack[i * t_len + t])
                .collect();
            let mut delta = Frame::from_raw(cw, ch, 3, samples);
            for k in (0..params.depth - 1).rev() {
                delta = upsample(&delta, dims[k].0, dims[k].1)?;
            }
            let sum: Vec<f64> = original
                .samples()
                .iter()
                .zip(delta.samples())
                .map(|(a, b)| a + b)
                .collect();
            let merged = Frame::from_raw(seq.width(), seq.height(), 3, sum);
            let mut rgb = yiq_to_rgb(&merged)?;
            rgb.clamp_unit();
            Ok(rgb)
        })
        .collect::<Result<_>>()?;

    FrameSequence::new(frames, seq.fps, Colorspace::Rgb)
}

fn magnify_motion(seq: &FrameSequence, params: &MagParams) -> Result<FrameSequence> {
    let t_len = seq.len();
    let mut pyramids: Vec<_> = seq
        .frames
        .par_iter()
        .map(|f| build_laplacian(f, params.depth))
        .collect::<Result<_>>()?;

    let plan = IdealBandpassPlan::new(t_len, seq.fps, &params.band)?;
    for level in 0..params.depth - 1 {
        let alpha = level_alpha(params.alpha, level, params.lambda_cutoff);
        if alpha == 0.0 {
            continue;
        }
        let bands: Vec<Frame> = pyramids.iter().map(|p| p.bands[level].clone()).collect();
        let stack = filter_stack(&bands, &plan, |_| alpha);
        pyramids.par_iter_mut().enumerate().for_each(|(t, pyr)| {
            for (i, v) in pyr.bands[level].samples_mut().iter_mut().enumerate() {
                *v += stack[i * t_len + t];
            }
        });
    }

    let frames: Vec<Frame> = pyramids
        .par_iter()
        .map(|pyr| {
            let mut f = collapse(pyr)?;
            f.clamp_unit();
            Ok(f)
        })
        .collect::<Result<_>>()?;
    FrameSequence::new(frames, seq.fps, Colorspace::Rgb)
}

/// Amplify temporal variation inside `params.band` by `params.alpha`.
pub fn magnify(seq: &FrameSequence, params: &MagParams) -> Result<FrameSequence> {
    params.validate(seq)?;
    match params.mode {
        MagMode::Color => magnify_color(seq, params),
        MagMode::Motion => magnify_motion(seq, params),
    }
}

/// Run [`magnify`] once per alpha, in order. An empty list is a no-op.
pub fn sweep_alpha(
    seq: &FrameSequence,
    params: &MagParams,
    alphas: &[f64],
) -> Result<Vec<FrameSequence>> {
    alphas
        .iter()
        .map(|&alpha| magnify(seq, &MagParams { alpha, ..*params }))
        .collect()
}
