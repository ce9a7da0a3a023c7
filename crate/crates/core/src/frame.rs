//! Frame and sequence containers.
//!
//! Samples are stored planar (all of channel 0 row-major, then channel 1, ...)
//! as `f64` in `[0, 1]` for RGB/GRAY data. YIQ planes may leave `[0, 1]`; the
//! range is only re-established when converting back to RGB and clamping at
//! the end of a pipeline stage.

use crate::error::{Error, Result};

/// Color interpretation of a [`FrameSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Colorspace {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "YIQ")]
    Yiq,
    #[serde(rename = "GRAY")]
    Gray,
}

impl Colorspace {
    pub fn channels(self) -> usize {
        match self {
            Colorspace::Rgb | Colorspace::Yiq => 3,
            Colorspace::Gray => 1,
        }
    }
}

/// Rectangular region of interest in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Roi {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Roi { x, y, w, h }
    }

    fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height)
    }
}

impl std::fmt::Display for Roi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}+{}+{}", self.w, self.h, self.x, self.y)
    }
}

/// One image plane set: `channels` planes of `width * height` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl Frame {
    /// Validating constructor: dims >= 1, channels 1 or 3, samples finite and
    /// of length `width * height * channels`.
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams("frame dimensions must be >= 1".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelMismatch(format!(
                "frames carry 1 or 3 channels, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("frame samples must be finite".into()));
        }
        Ok(Frame {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Constant-valued frame.
    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Frame::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    // Internal constructor for values produced by the pipeline itself.
    pub(crate) fn from_raw(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(samples.len(), width * height * channels);
        Frame {
            width,
            height,
            channels,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// One full channel plane, row-major.
    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.samples[channel * n..(channel + 1) * n]
    }

    pub fn sample(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.samples[channel * self.width * self.height + y * self.width + x]
    }

    pub fn set_sample(&mut self, x: usize, y: usize, channel: usize, value: f64) {
        self.samples[channel * self.width * self.height + y * self.width + x] = value;
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Luma plane: BT.601 weights for 3-channel RGB frames, the sole plane
    /// for single-channel frames.
    pub fn luma(&self) -> Vec<f64> {
        if self.channels == 1 {
            return self.samples.clone();
        }
        let n = self.width * self.height;
        let (r, g, b) = (
            &self.samples[0..n],
            &self.samples[n..2 * n],
            &self.samples[2 * n..3 * n],
        );
        (0..n)
            .map(|i| 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i])
            .collect()
    }

    pub fn crop(&self, roi: Roi) -> Result<Frame> {
        if !roi.fits(self.width, self.height) {
            return Err(Error::RoiOutOfBounds {
                roi: roi.to_string(),
                width: self.width,
                height: self.height,
            });
        }
        let mut out = Vec::with_capacity(roi.w * roi.h * self.channels);
        for c in 0..self.channels {
            let plane = self.plane(c);
            for y in roi.y..roi.y + roi.h {
                out.extend_from_slice(
                    &plane[y * self.width + roi.x..y * self.width + roi.x + roi.w],
                );
            }
        }
        Ok(Frame::from_raw(roi.w, roi.h, self.channels, out))
    }

    /// Clamp every sample into `[0, 1]` in place.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.samples {
            *v = v.clamp(0.0, 1.0);
        }
    }
}

/// A temporally ordered run of equally sized frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub fps: f64,
    pub colorspace: Colorspace,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64, colorspace: Colorspace) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParams(format!(
                "fps must be positive, got {fps}"
            )));
        }
        let first = &frames[0];
        if first.channels() != colorspace.channels() {
            return Err(Error::ChannelMismatch(format!(
                "{colorspace:?} needs {} channels, frames carry {}",
                colorspace.channels(),
                first.channels()
            )));
        }
        for (i, f) in frames.iter().enumerate() {
            if !f.same_shape(first) {
                return Err(Error::DimensionMismatch(format!(
                    "frame {i} is {}x{}x{}, frame 0 is {}x{}x{}",
                    f.width(),
                    f.height(),
                    f.channels(),
                    first.width(),
                    first.height(),
                    first.channels()
                )));
            }
        }
        Ok(FrameSequence {
            frames,
            fps,
            colorspace,
        })
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Crop every frame to `roi`; fps and colorspace carry over.
    pub fn crop(&self, roi: Roi) -> Result<FrameSequence> {
        let frames = self
            .frames
            .iter()
            .map(|f| f.crop(roi))
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameSequence {
            frames,
            fps: self.fps,
            colorspace: self.colorspace,
        })
    }
}

// NTSC YIQ transform. The inverse is derived numerically from the forward
// matrix so the round trip is exact to matrix-inversion precision.
const RGB_TO_YIQ: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [0.5959, -0.2746, -0.3213],
    [0.2115, -0.5227, 0.3112],
];

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let c = |r: usize, c: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    // adjugate transpose over determinant
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = c(col, r) / det;
        }
    }
    inv
}

fn yiq_inverse() -> [[f64; 3]; 3] {
    invert3(&RGB_TO_YIQ)
}

fn apply_matrix(frame: &Frame, m: &[[f64; 3]; 3]) -> Result<Frame> {
    if frame.channels() != 3 {
        return Err(Error::ChannelMismatch(
            "colorspace conversion needs 3-channel frames".into(),
        ));
    }
    let n = frame.width() * frame.height();
    let (a, b, c) = (frame.plane(0), frame.plane(1), frame.plane(2));
    let mut out = vec![0.0; 3 * n];
    let (o0, rest) = out.split_at_mut(n);
    let (o1, o2) = rest.split_at_mut(n);
    for i in 0..n {
        o0[i] = m[0][0] * a[i] + m[0][1] * b[i] + m[0][2] * c[i];
        o1[i] = m[1][0] * a[i] + m[1][1] * b[i] + m[1][2] * c[i];
        o2[i] = m[2][0] * a[i] + m[2][1] * b[i] + m[2][2] * c[i];
    }
    Ok(Frame::from_raw(frame.width(), frame.height(), 3, out))
}

/// RGB frame to NTSC YIQ (Y in plane 0; I and Q may leave `[0, 1]`).
pub fn rgb_to_yiq(frame: &Frame) -> Result<Frame> {
    apply_matrix(frame, &RGB_TO_YIQ)
}

/// YIQ frame back to RGB. No clamping: callers clamp once at pipeline end.
pub fn yiq_to_rgb(frame: &Frame) -> Result<Frame> {
    apply_matrix(frame, &yiq_inverse())
}

/// Sequence-level YIQ conversion.
pub fn sequence_to_yiq(seq: &FrameSequence) -> Result<FrameSequence> {
    if seq.colorspace != Colorspace::Rgb {
        return Err(Error::ChannelMismatch(format!(
            "expected an RGB sequence, got {:?}",
            seq.colorspace
        )));
    }
    let frames = seq
        .frames
        .iter()
        .map(rgb_to_yiq)
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameSequence {
        frames,
        fps: seq.fps,
        colorspace: Colorspace::Yiq,
    })
}
