//! Structural similarity between adjacent frames, and the summary features
//! that turn an SSIM-over-time curve into a fixed-length vector.
//!
//! SSIM is computed on luma only, over all NxN windows at a fixed stride
//! with uniform weights and population (co)variances. Per-frame reductions
//! use pairwise summation so results do not depend on accumulation order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Colorspace, Frame, FrameSequence};

/// Windowing and stabilization constants. Defaults: 8x8 windows, stride 1,
/// `c1 = (0.01 * L)^2`, `c2 = (0.03 * L)^2` with dynamic range `L = 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub stride: usize,
    pub c1: f64,
    pub c2: f64,
    pub dynamic_range: f64,
}

impl SsimParams {
    pub fn for_dynamic_range(l: f64) -> Self {
        SsimParams {
            window: 8,
            stride: 1,
            c1: (0.01 * l) * (0.01 * l),
            c2: (0.03 * l) * (0.03 * l),
            dynamic_range: l,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidParams("ssim window must be >= 2".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParams("ssim stride must be >= 1".into()));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidParams(
                "ssim stabilizers must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams::for_dynamic_range(1.0)
    }
}

/// Which arm of the pipeline a series was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SourceTag {
    #[serde(rename = "ORIGINAL")]
    Original,
    #[serde(rename = "EVM")]
    Evm,
}

impl SourceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceTag::Original => "ORIGINAL",
            SourceTag::Evm => "EVM",
        }
    }
}

/// Mean SSIM of each adjacent frame pair; `values[i]` compares frames
/// `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimSeries {
    pub values: Vec<f64>,
    pub source: SourceTag,
}

/// Names of the seven summary statistics, in serialization order.
pub const FEATURE_NAMES: [&str; 7] = [
    "mean",
    "std",
    "min",
    "p05",
    "drop_count",
    "max_run_below_mean",
    "lag1_autocorr",
];

/// Fixed-order summary of an SSIM series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p05: f64,
    pub drop_count: usize,
    pub max_run_below_mean: usize,
    pub lag1_autocorr: f64,
}

impl FeatureVector {
    /// Inverse of [`Self::to_array`]; count fields round back to integers.
    pub fn from_array(a: [f64; 7]) -> Self {
        FeatureVector {
            mean: a[0],
            std: a[1],
            min: a[2],
            p05: a[3],
            drop_count: a[4].round() as usize,
            max_run_below_mean: a[5].round() as usize,
            lag1_autocorr: a[6],
        }
    }

    pub fn to_array(self) -> [f64; 7] {
        [
            self.mean,
            self.std,
            self.min,
            self.p05,
            self.drop_count as f64,
            self.max_run_below_mean as f64,
            self.lag1_autocorr,
        ]
    }
}

/// Order-stable sum: split in half recursively, fold small tails.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn luma_of(frame: &Frame, colorspace: Colorspace) -> Vec<f64> {
    match colorspace {
        // Y already sits in plane 0
        Colorspace::Yiq => frame.plane(0).to_vec(),
        _ => frame.luma(),
    }
}

// Mean SSIM over all windows of two equally sized luma planes.
fn ssim_luma(lx: &[f64], ly: &[f64], w: usize, h: usize, p: &SsimParams) -> f64 {
    let n = p.window;
    let count = n * n;
    let mut scores = Vec::new();
    let mut y0 = 0;
    while y0 + n <= h {
        let mut x0 = 0;
        while x0 + n <= w {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for yy in y0..y0 + n {
                for xx in x0..x0 + n {
                    sx += lx[yy * w + xx];
                    sy += ly[yy * w + xx];
                }
            }
            let mx = sx / count as f64;
            let my = sy / count as f64;
            // variances go through the covariance accumulator so that
            // ssim(f, f) compares bit-identical numerator and denominator
            let mut vxx = 0.0;
            let mut vyy = 0.0;
            let mut vxy = 0.0;
            for yy in y0..y0 + n {
                for xx in x0..x0 + n {
                    let dx = lx[yy * w + xx] - mx;
                    let dy = ly[yy * w + xx] - my;
                    vxx += dx * dx;
                    vyy += dy * dy;
                    vxy += dx * dy;
                }
            }
            let (vxx, vyy, vxy) = (vxx / count as f64, vyy / count as f64, vxy / count as f64);
            let numerator = (2.0 * mx * my + p.c1) * (2.0 * vxy + p.c2);
            let denominator = (mx * mx + my * my + p.c1) * (vxx + vyy + p.c2);
            scores.push(numerator / denominator);
            x0 += p.stride;
        }
        y0 += p.stride;
    }
    pairwise_sum(&scores) / scores.len() as f64
}

/// Mean windowed SSIM between two frames. Three-channel input is treated
/// as RGB and reduced to luma first.
pub fn ssim_pair(x: &Frame, y: &Frame, p: &SsimParams) -> Result<f64> {
    p.validate()?;
    if !x.same_shape(y) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            x.width(),
            y.height(),
            x.channels(),
            y.width(),
            y.height(),
            y.channels()
        )));
    }
    if x.width() < p.window || x.height() < p.window {
        return Err(Error::FrameSmallerThanWindow {
            width: x.width(),
            height: x.height(),
            window: p.window,
        });
    }
    let lx = x.luma();
    let ly = y.luma();
    Ok(ssim_luma(&lx, &ly, x.width(), x.height(), p))
}

/// SSIM of every adjacent frame pair. The result is tagged
/// [`SourceTag::Original`]; callers measuring a magnified clip re-tag it.
pub fn ssim_series(seq: &FrameSequence, p: &SsimParams) -> Result<SsimSeries> {
    p.validate()?;
    if seq.len() < 2 {
        return Err(Error::TooFewFrames {
            len: seq.len(),
            min: 2,
        });
    }
    let (w, h) = (seq.width(), seq.height());
    if w < p.window || h < p.window {
        return Err(Error::FrameSmallerThanWindow {
            width: w,
            height: h,
            window: p.window,
        });
    }
    let lumas: Vec<Vec<f64>> = seq
        .frames
        .par_iter()
        .map(|f| luma_of(f, seq.colorspace))
        .collect();
    let values: Vec<f64> = (0..lumas.len() - 1)
        .into_par_iter()
        .map(|i| ssim_luma(&lumas[i], &lumas[i + 1], w, h, p))
        .collect();
    Ok(SsimSeries {
        values,
        source: SourceTag::Original,
    })
}

/// Reduce an SSIM series to the seven summary statistics.
///
/// `p05` interpolates linearly between order statistics at rank
/// `0.05 * (n - 1)`. `drop_count` counts values strictly below
/// `mean - 2 * std`. `lag1_autocorr` is defined as 0 for constant series.
pub fn features(s: &SsimSeries) -> Result<FeatureVector> {
    let v = &s.values;
    let n = v.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { len: n, min: 3 });
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        // exact degenerate path: a constant series has zero spread
        return Ok(FeatureVector {
            mean: min,
            std: 0.0,
            min,
            p05: min,
            drop_count: 0,
            max_run_below_mean: 0,
            lag1_autocorr: 0.0,
        });
    }

    let mean = pairwise_sum(v) / n as f64;
    let deviations: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let sq_sum = pairwise_sum(&deviations.iter().map(|d| d * d).collect::<Vec<_>>());
    let std = (sq_sum / n as f64).sqrt();

    let mut sorted = v.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = 0.05 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    let p05 = if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    };

    let threshold = mean - 2.0 * std;
    let drop_count = v.iter().filter(|&&x| x < threshold).count();

    let mut max_run = 0usize;
    let mut run = 0usize;
    for &x in v {
        if x < mean {
            run += 1;
            max_run = max_run.max(run);
        } else {
            run = 0;
        }
    }

    let lag1_autocorr = if std == 0.0 {
        0.0
    } else {
        let num: f64 = (0..n - 1).map(|t| deviations[t] * deviations[t + 1]).sum();
        num / sq_sum
    };

    Ok(FeatureVector {
        mean,
        std,
        min,
        p05,
        drop_count,
        max_run_below_mean: max_run,
        lag1_autocorr,
    })
}
