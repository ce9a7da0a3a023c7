//! Deterministic synthetic clips for fixtures and calibration.
//!
//! Every generator starts from the same textured base pattern (smooth
//! sinusoidal shading plus a little seeded noise, range well inside `[0, 1]`)
//! so that pyramids have detail to work with and amplified output has
//! headroom before clamping.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::{Colorspace, Frame, FrameSequence};
use crate::pyramid::mirror;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    /// The base pattern repeated unchanged.
    Static,
    /// Base pattern plus a spatially uniform brightness sinusoid.
    SineBrightness { freq_hz: f64, amplitude: f64 },
    /// Base pattern translating horizontally by a subpixel sinusoid.
    SineMotion { freq_hz: f64, amplitude_px: f64 },
    /// Static clip with `corrupted` interior frames hit by heavy noise,
    /// mimicking frame-level tampering.
    Glitch { corrupted: usize },
}

// Smooth shading in [0.285, 0.715]: 0.5 +-(0.12 + 0.08 + 0.015) at the
// extremes, leaving room for amplification before anything saturates.
fn base_pattern(width: usize, height: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(width * height * 3);
    for c in 0..3 {
        let phase = c as f64 * 2.1;
        for y in 0..height {
            for x in 0..width {
                let v = 0.5
                    + 0.12 * (TAU * 2.0 * x as f64 / width as f64 + phase).sin()
                    + 0.08 * (TAU * 3.0 * y as f64 / height as f64 + 0.7 * phase).cos()
                    + 0.03 * (rng.gen::<f64>() - 0.5);
                samples.push(v);
            }
        }
    }
    Frame::from_raw(width, height, 3, samples)
}

fn sample_bilinear(plane: &[f64], width: usize, height: usize, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as isize, y0 as isize);
    let at = |ix: isize, iy: isize| plane[mirror(iy, height) * width + mirror(ix, width)];
    let top = at(xi, yi) * (1.0 - fx) + at(xi + 1, yi) * fx;
    let bottom = at(xi, yi + 1) * (1.0 - fx) + at(xi + 1, yi + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

fn translate(frame: &Frame, dx: f64) -> Frame {
    let (w, h) = (frame.width(), frame.height());
    let mut samples = Vec::with_capacity(w * h * 3);
    for c in 0..3 {
        let plane = frame.plane(c);
        for y in 0..h {
            for x in 0..w {
                samples.push(sample_bilinear(plane, w, h, x as f64 - dx, y as f64));
            }
        }
    }
    Frame::from_raw(w, h, 3, samples)
}

fn check_freq(freq_hz: f64, fps: f64) -> Result<()> {
    if !(freq_hz.is_finite() && freq_hz > 0.0 && freq_hz <= fps / 2.0) {
        return Err(Error::InvalidParams(format!(
            "synth frequency {freq_hz} Hz must lie in (0, fps/2 = {}]",
            fps / 2.0
        )));
    }
    Ok(())
}

/// Generate a synthetic RGB clip. Identical inputs produce identical output.
pub fn synth_clip(kind: &SynthKind, params: &SynthParams) -> Result<FrameSequence> {
    let base = base_pattern(params.width, params.height, params.seed);
    let n = params.frames;
    let frames: Vec<Frame> = match *kind {
        SynthKind::Static => vec![base; n],
        SynthKind::SineBrightness { freq_hz, amplitude } => {
            check_freq(freq_hz, params.fps)?;
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "brightness amplitude must be >= 0, got {amplitude}"
                )));
            }
            (0..n)
                .map(|t| {
                    let offset = amplitude * (TAU * freq_hz * t as f64 / params.fps).sin();
                    let samples = base.samples().iter().map(|v| v + offset).collect();
                    Frame::from_raw(params.width, params.height, 3, samples)
                })
                .collect()
        }
        SynthKind::SineMotion {
            freq_hz,
            amplitude_px,
        } => {
            check_freq(freq_hz, params.fps)?;
            if !(amplitude_px.is_finite() && amplitude_px >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "translation amplitude must be >= 0, got {amplitude_px}"
                )));
            }
            (0..n)
                .map(|t| {
                    let dx = amplitude_px * (TAU * freq_hz * t as f64 / params.fps).sin();
                    translate(&base, dx)
                })
                .collect()
        }
        SynthKind::Glitch { corrupted } => {
            // corrupt only interior frames so first/last stay clean anchors
            let interior = n.saturating_sub(2);
            if corrupted > interior {
                return Err(Error::InvalidParams(format!(
                    "cannot corrupt {corrupted} of {n} frames (only {interior} interior)"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(1));
            let mut picks = rand::seq::index::sample(&mut rng, interior, corrupted).into_vec();
            for p in &mut picks {
                *p += 1;
            }
            picks.sort_unstable();
            let mut frames = vec![base.clone(); n];
            for t in picks {
                for v in frames[t].samples_mut() {
                    *v = (*v + 0.25 * (2.0 * rng.gen::<f64>() - 1.0)).clamp(0.0, 1.0);
                }
            }
            frames
        }
    };
    FrameSequence::new(frames, params.fps, Colorspace::Rgb)
}
