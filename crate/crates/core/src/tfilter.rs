//! Temporal bandpass filters over per-sample time series.
//!
//! Two routes with different trade-offs:
//! - [`ideal_bandpass`]: DFT-domain brick wall. Zero-phase, exact on
//!   bin-aligned components, and an idempotent projection; needs the whole
//!   series in memory.
//! - [`iir_bandpass`]: difference of two first-order lowpasses,
//!   `l[t] = l[t-1] + a * (x[t] - l[t-1])` with
//!   `a = (2*pi*fc/fps) / (1 + 2*pi*fc/fps)` and `l[0] = x[0]`. Causal and
//!   O(1) per sample, with the usual soft rolloff and phase lag.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Passband in Hz. Valid when `0 < f_lo < f_hi`; the Nyquist bound is
/// checked against a concrete sample rate at the point of use.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BandSpec {
    pub f_lo: f64,
    pub f_hi: f64,
}

impl BandSpec {
    pub fn new(f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(f_lo.is_finite() && f_hi.is_finite() && 0.0 < f_lo && f_lo < f_hi) {
            return Err(Error::InvalidBand { f_lo, f_hi });
        }
        Ok(BandSpec { f_lo, f_hi })
    }

    pub(crate) fn check_nyquist(&self, fps: f64) -> Result<()> {
        let nyquist = fps / 2.0;
        if self.f_hi > nyquist {
            return Err(Error::BandAboveNyquist {
                f_lo: self.f_lo,
                f_hi: self.f_hi,
                nyquist,
            });
        }
        Ok(())
    }

    pub fn contains(&self, freq: f64) -> bool {
        self.f_lo <= freq && freq <= self.f_hi
    }
}

/// A sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub fps: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, fps: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                len: values.len(),
                min: 2,
            });
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParams(format!(
                "fps must be positive, got {fps}"
            )));
        }
        Ok(TimeSeries { values, fps })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reusable DFT plan and passband mask for series of a fixed length.
///
/// The mask keeps DFT bin `k` (and its conjugate mirror) exactly when the
/// bin frequency `min(k, n-k) * fps / n` lies inside the band, endpoints
/// included. DC is never inside a valid band, so means are always removed.
pub struct IdealBandpassPlan {
    len: usize,
    keep: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Per-thread buffers for [`IdealBandpassPlan::apply`].
pub struct BandpassScratch {
    buf: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
}

impl IdealBandpassPlan {
    pub fn new(len: usize, fps: f64, band: &BandSpec) -> Result<Self> {
        if len < 4 {
            return Err(Error::SeriesTooShort { len, min: 4 });
        }
        band.check_nyquist(fps)?;
        let keep: Vec<bool> = (0..len)
            .map(|k| {
                let folded = k.min(len - k) as f64;
                band.contains(folded * fps / len as f64)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(IdealBandpassPlan {
            len,
            keep,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn make_scratch(&self) -> BandpassScratch {
        let n = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        BandpassScratch {
            buf: vec![Complex64::default(); self.len],
            fft_scratch: vec![Complex64::default(); n],
        }
    }

    /// Filter one series in place. `values.len()` must equal the plan length.
    pub fn apply(&self, values: &mut [f64], scratch: &mut BandpassScratch) {
        assert_eq!(values.len(), self.len, "series length differs from plan");
        for (c, &v) in scratch.buf.iter_mut().zip(values.iter()) {
            *c = Complex64::new(v, 0.0);
        }
        self.forward
            .process_with_scratch(&mut scratch.buf, &mut scratch.fft_scratch);
        for (c, &keep) in scratch.buf.iter_mut().zip(&self.keep) {
            if !keep {
                *c = Complex64::default();
            }
        }
        self.inverse
            .process_with_scratch(&mut scratch.buf, &mut scratch.fft_scratch);
        let scale = 1.0 / self.len as f64;
        for (v, c) in values.iter_mut().zip(&scratch.buf) {
            *v = c.re * scale;
        }
    }
}

/// DFT brick-wall bandpass; see [`IdealBandpassPlan`] for bin selection.
pub fn ideal_bandpass(s: &TimeSeries, band: &BandSpec) -> Result<TimeSeries> {
    let plan = IdealBandpassPlan::new(s.len(), s.fps, band)?;
    let mut scratch = plan.make_scratch();
    let mut values = s.values.clone();
    plan.apply(&mut values, &mut scratch);
    Ok(TimeSeries { values, fps: s.fps })
}

fn lowpass(values: &[f64], fps: f64, fc: f64) -> Vec<f64> {
    let w = 2.0 * std::f64::consts::PI * fc / fps;
    let a = w / (1.0 + w);
    let mut out = Vec::with_capacity(values.len());
    let mut l = values[0];
    out.push(l);
    for &x in &values[1..] {
        l += a * (x - l);
        out.push(l);
    }
    out
}

/// Causal bandpass as the difference of two first-order lowpasses. Exact
/// zero DC gain: constant inputs produce identically zero output.
pub fn iir_bandpass(s: &TimeSeries, band: &BandSpec) -> Result<TimeSeries> {
    if s.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: s.len(),
            min: 2,
        });
    }
    band.check_nyquist(s.fps)?;
    let hi = lowpass(&s.values, s.fps, band.f_hi);
    let lo = lowpass(&s.values, s.fps, band.f_lo);
    let values = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
    Ok(TimeSeries { values, fps: s.fps })
}
