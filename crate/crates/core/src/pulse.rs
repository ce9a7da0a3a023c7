//! Spectral pulse-rate estimation from a region's mean intensity over time.
//!
//! The estimator mean-subtracts, applies a symmetric Hann window, zero-pads
//! to the next power of two at least 8x the series length, and searches the
//! magnitude spectrum inside the requested band. The winning bin is refined
//! by parabolic interpolation on log magnitude, which can never move the
//! estimate outside the band.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::frame::{Colorspace, FrameSequence, Roi};
use crate::ssim::pairwise_sum;
use crate::tfilter::{BandSpec, TimeSeries};

/// Which plane feeds the mean-intensity series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Channel {
    R,
    G,
    B,
    /// Luma: BT.601 mix for RGB, plane 0 for YIQ and GRAY.
    Y,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
            Channel::Y => "Y",
        }
    }
}

/// Result of a band-limited spectral peak search.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEstimate {
    /// Beats per minute; exactly `60 * freq`.
    pub bpm: f64,
    /// Peak frequency in Hz, always inside `band`.
    pub freq: f64,
    pub band: BandSpec,
    /// `(frequency, magnitude)` pairs over the padded half spectrum.
    pub spectrum: Vec<(f64, f64)>,
    /// Magnitude at the winning bin before interpolation.
    pub peak_magnitude: f64,
}

/// Average one channel over `roi` in every frame.
pub fn mean_series(seq: &FrameSequence, roi: Roi, channel: Channel) -> Result<TimeSeries> {
    match (channel, seq.colorspace) {
        (Channel::Y, _) | (Channel::R | Channel::G | Channel::B, Colorspace::Rgb) => {}
        (c, space) => {
            return Err(Error::ChannelMismatch(format!(
                "channel {} is undefined for a {:?} sequence",
                c.as_str(),
                space
            )))
        }
    }

    let mut values = Vec::with_capacity(seq.len());
    let mut window = Vec::with_capacity(roi.w * roi.h);
    for frame in &seq.frames {
        let cropped = frame.crop(roi)?;
        window.clear();
        match channel {
            Channel::R => window.extend_from_slice(cropped.plane(0)),
            Channel::G => window.extend_from_slice(cropped.plane(1)),
            Channel::B => window.extend_from_slice(cropped.plane(2)),
            Channel::Y => match seq.colorspace {
                Colorspace::Yiq => window.extend_from_slice(cropped.plane(0)),
                _ => window.extend(cropped.luma()),
            },
        }
        values.push(pairwise_sum(&window) / window.len() as f64);
    }
    TimeSeries::new(values, seq.fps)
}

/// Locate the dominant in-band frequency of `s` and report it in BPM.
pub fn estimate_bpm(s: &TimeSeries, band: &BandSpec) -> Result<PulseEstimate> {
    let n = s.len();
    if n < 64 {
        return Err(Error::SeriesTooShort { len: n, min: 64 });
    }
    band.check_nyquist(s.fps)?;

    let mean = pairwise_sum(&s.values) / n as f64;
    let padded_len = (8 * n).next_power_of_two();
    let mut buf = vec![Complex64::default(); padded_len];
    for (t, (&x, slot)) in s.values.iter().zip(buf.iter_mut()).enumerate() {
        let hann = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * t as f64 / (n - 1) as f64).cos());
        *slot = Complex64::new((x - mean) * hann, 0.0);
    }
    FftPlanner::new()
        .plan_fft_forward(padded_len)
        .process(&mut buf);

    let bin_hz = s.fps / padded_len as f64;
    let half = padded_len / 2;
    let spectrum: Vec<(f64, f64)> = (0..=half)
        .map(|k| (k as f64 * bin_hz, buf[k].norm()))
        .collect();

    // highest in-band magnitude; ties resolve to the lowest bin
    let mut peak: Option<(usize, f64)> = None;
    for (k, &(freq, mag)) in spectrum.iter().enumerate() {
        if band.contains(freq) && peak.is_none_or(|(_, best)| mag > best) {
            peak = Some((k, mag));
        }
    }
    let (k, peak_magnitude) = peak.ok_or(Error::NoPeak)?;
    if peak_magnitude < 1e-12 {
        return Err(Error::NoPeak);
    }

    // parabolic refinement on log magnitude over the peak and neighbors
    let mut delta = 0.0;
    if k > 0 && k < half {
        let (left, center, right) = (spectrum[k - 1].1, spectrum[k].1, spectrum[k + 1].1);
        if left > 0.0 && right > 0.0 {
            let (a, b, g) = (left.ln(), center.ln(), right.ln());
            let denom = a - 2.0 * b + g;
            if denom.abs() > 1e-30 {
                delta = (0.5 * (a - g) / denom).clamp(-0.5, 0.5);
            }
        }
    }
    let freq = ((k as f64 + delta) * bin_hz).clamp(band.f_lo, band.f_hi);

    Ok(PulseEstimate {
        bpm: 60.0 * freq,
        freq,
        band: *band,
        spectrum,
        peak_magnitude,
    })
}

/// Absolute BPM difference between two estimates.
pub fn compare_pulse(a: &PulseEstimate, b: &PulseEstimate) -> f64 {
    (a.bpm - b.bpm).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;

    fn series(f: impl Fn(f64) -> f64, n: usize, fps: f64) -> TimeSeries {
        TimeSeries::new((0..n).map(|t| f(t as f64 / fps)).collect(), fps).unwrap()
    }

    const TAU: f64 = std::f64::consts::TAU;

    // Dense DTFT magnitude of the mean-subtracted, Hann-windowed series,
    // evaluated by direct summation: the reference for peak locations.
    fn dtft_peak(s: &TimeSeries, f_lo: f64, f_hi: f64) -> f64 {
        let n = s.len();
        let mean: f64 = s.values.iter().sum::<f64>() / n as f64;
        let windowed: Vec<f64> = s
            .values
            .iter()
            .enumerate()
            .map(|(t, &x)| (x - mean) * 0.5 * (1.0 - (TAU * t as f64 / (n - 1) as f64).cos()))
            .collect();
        let mut best = (f_lo, 0.0);
        let mut f = f_lo;
        while f <= f_hi {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in windowed.iter().enumerate() {
                let phase = TAU * f * t as f64 / s.fps;
                re += x * phase.cos();
                im -= x * phase.sin();
            }
            let mag = (re * re + im * im).sqrt();
            if mag > best.1 {
                best = (f, mag);
            }
            f += 1e-4;
        }
        best.0
    }

    #[test]
    fn separates_two_sinusoids_and_matches_dense_reference() {
        let s = series(
            |t| (TAU * 1.1 * t).sin() + 0.3 * (TAU * 1.25 * t).sin(),
            300,
            30.0,
        );
        let band = BandSpec::new(1.0, 1.33).unwrap();
        let est = estimate_bpm(&s, &band).unwrap();
        assert!((est.freq - 1.1).abs() < 0.02, "freq {}", est.freq);
        let reference = dtft_peak(&s, 1.0, 1.33);
        assert!(
            (est.freq - reference).abs() < 0.02,
            "{} vs dense {reference}",
            est.freq
        );
        assert_eq!(est.bpm, 60.0 * est.freq);
    }

    #[test]
    fn pure_tone_lands_within_half_a_bpm() {
        let s = series(|t| 0.5 + 0.004 * (TAU * 1.096 * t).sin(), 300, 30.0);
        let band = BandSpec::new(1.0, 1.33).unwrap();
        let est = estimate_bpm(&s, &band).unwrap();
        assert!((est.bpm - 65.76).abs() < 0.5, "bpm {}", est.bpm);
    }

    #[test]
    fn estimate_is_invariant_to_offset_and_positive_scale() {
        let base = series(|t| (TAU * 1.2 * t).sin(), 256, 30.0);
        let band = BandSpec::new(1.0, 1.33).unwrap();
        let a = estimate_bpm(&base, &band).unwrap();
        let shifted =
            TimeSeries::new(base.values.iter().map(|v| 3.0 * v + 0.7).collect(), 30.0).unwrap();
        let b = estimate_bpm(&shifted, &band).unwrap();
        assert!((a.bpm - b.bpm).abs() < 1e-6);
    }

    #[test]
    fn interpolation_cannot_escape_the_band() {
        // strong tone just past the top edge: the in-band winner is the edge
        // bin and refinement must clamp to f_hi
        let s = series(|t| (TAU * 1.38 * t).sin(), 300, 30.0);
        let band = BandSpec::new(1.0, 1.33).unwrap();
        let est = estimate_bpm(&s, &band).unwrap();
        assert!(band.contains(est.freq), "freq {} outside band", est.freq);
        assert_eq!(est.bpm, 60.0 * est.freq);
    }

    #[test]
    fn spectrum_covers_the_padded_half_axis() {
        let s = series(|t| (TAU * 1.1 * t).sin(), 300, 30.0);
        let band = BandSpec::new(1.0, 1.33).unwrap();
        let est = estimate_bpm(&s, &band).unwrap();
        // 8 * 300 = 2400 pads to 4096
        assert_eq!(est.spectrum.len(), 4096 / 2 + 1);
        assert_eq!(est.spectrum[0].0, 0.0);
        let (last_f, _) = est.spectrum[est.spectrum.len() - 1];
        assert!((last_f - 15.0).abs() < 1e-9, "Nyquist bin at {last_f}");
    }

    #[test]
    fn flat_and_out_of_band_series_produce_no_peak() {
        let flat = TimeSeries::new(vec![0.5; 128], 30.0).unwrap();
        let band = BandSpec::new(1.0, 1.33).unwrap();
        assert!(matches!(
            estimate_bpm(&flat, &band).unwrap_err(),
            Error::NoPeak
        ));
    }

    #[test]
    fn short_series_and_nyquist_are_rejected() {
        let s = series(|t| (TAU * 1.1 * t).sin(), 63, 30.0);
        let band = BandSpec::new(1.0, 1.33).unwrap();
        assert!(matches!(
            estimate_bpm(&s, &band).unwrap_err(),
            Error::SeriesTooShort { min: 64, .. }
        ));
        let s = series(|t| (TAU * 1.1 * t).sin(), 128, 30.0);
        let wide = BandSpec::new(1.0, 16.0).unwrap();
        assert!(matches!(
            estimate_bpm(&s, &wide).unwrap_err(),
            Error::BandAboveNyquist { .. }
        ));
    }

    #[test]
    fn mean_series_averages_the_requested_channel_over_the_roi() {
        // 2x2 frames where each channel has a known ramp
        let make = |offset: f64| {
            let mut s = Vec::new();
            for c in 0..3 {
                for i in 0..4 {
                    s.push(offset + c as f64 * 0.1 + i as f64 * 0.01);
                }
            }
            Frame::new(2, 2, 3, s).unwrap()
        };
        let seq = FrameSequence::new(vec![make(0.1), make(0.2)], 30.0, Colorspace::Rgb).unwrap();
        let roi = Roi::new(0, 0, 2, 2);
        let g = mean_series(&seq, roi, Channel::G).unwrap();
        assert!((g.values[0] - (0.1 + 0.1 + 0.015)).abs() < 1e-12);
        assert!((g.values[1] - (0.2 + 0.1 + 0.015)).abs() < 1e-12);

        let y = mean_series(&seq, roi, Channel::Y).unwrap();
        let expect = 0.299 * (0.1 + 0.015) + 0.587 * (0.2 + 0.015) + 0.114 * (0.3 + 0.015);
        assert!((y.values[0] - expect).abs() < 1e-12);

        // sub-roi only sees its own pixels
        let sub = mean_series(&seq, Roi::new(1, 1, 1, 1), Channel::R).unwrap();
        assert!((sub.values[0] - 0.13).abs() < 1e-12);
    }

    #[test]
    fn mean_series_validates_roi_and_channel() {
        let f = Frame::filled(4, 4, 3, 0.5).unwrap();
        let seq = FrameSequence::new(vec![f.clone(), f], 30.0, Colorspace::Rgb).unwrap();
        assert!(matches!(
            mean_series(&seq, Roi::new(2, 2, 4, 4), Channel::G).unwrap_err(),
            Error::RoiOutOfBounds { .. }
        ));
        let g = Frame::filled(4, 4, 1, 0.5).unwrap();
        let gray = FrameSequence::new(vec![g.clone(), g], 30.0, Colorspace::Gray).unwrap();
        assert!(matches!(
            mean_series(&gray, Roi::new(0, 0, 4, 4), Channel::R).unwrap_err(),
            Error::ChannelMismatch(_)
        ));
        assert!(mean_series(&gray, Roi::new(0, 0, 4, 4), Channel::Y).is_ok());
    }

    #[test]
    fn compare_pulse_is_absolute_bpm_distance() {
        let band = BandSpec::new(1.0, 1.33).unwrap();
        let a = estimate_bpm(&series(|t| (TAU * 1.1 * t).sin(), 300, 30.0), &band).unwrap();
        let b = estimate_bpm(&series(|t| (TAU * 1.25 * t).sin(), 300, 30.0), &band).unwrap();
        let d = compare_pulse(&a, &b);
        assert!((d - (b.bpm - a.bpm).abs()) == 0.0);
        assert!(d > 8.0 && d < 10.0, "delta {d}");
    }
}
