//! Binomial image pyramids.
//!
//! All resampling uses the separable 5-tap binomial kernel `[1 4 6 4 1]/16`
//! with reflect-101 borders. Decimation keeps even indices, so a length-n
//! axis reduces to `ceil(n/2)` and both `2n` and `2n-1` are valid expansion
//! targets. Upsampling is zero insertion on the target grid followed by the
//! same kernel scaled by 2 per axis, which preserves constants on both
//! sample phases.

use crate::error::{Error, Result};
use crate::frame::Frame;

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Laplacian decomposition: fine-to-coarse detail bands plus the lowpass
/// residual (the coarsest Gaussian level).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPyramid {
    pub bands: Vec<Frame>,
    pub residual: Frame,
}

impl LaplacianPyramid {
    /// Number of Gaussian levels this decomposition came from.
    pub fn depth(&self) -> usize {
        self.bands.len() + 1
    }
}

// reflect-101 index fold: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
pub(crate) fn mirror(i: isize, n: usize) -> usize {
    debug_assert!(n >= 2);
    let period = 2 * (n as isize - 1);
    let folded = i.rem_euclid(period);
    if folded < n as isize {
        folded as usize
    } else {
        (period - folded) as usize
    }
}

fn down_pass_h(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let ow = w.div_ceil(2);
    let mut out = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for ox in 0..ow {
            let center = 2 * ox as isize;
            let mut acc = 0.0;
            for (t, k) in KERNEL.iter().enumerate() {
                acc += k * row[mirror(center + t as isize - 2, w)];
            }
            out[y * ow + ox] = acc;
        }
    }
    out
}

fn down_pass_v(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let oh = h.div_ceil(2);
    let mut out = vec![0.0; w * oh];
    for oy in 0..oh {
        let center = 2 * oy as isize;
        for x in 0..w {
            let mut acc = 0.0;
            for (t, k) in KERNEL.iter().enumerate() {
                acc += k * plane[mirror(center + t as isize - 2, h) * w + x];
            }
            out[oy * w + x] = acc;
        }
    }
    out
}

fn up_pass_h(plane: &[f64], w: usize, h: usize, tw: usize) -> Vec<f64> {
    let mut out = vec![0.0; tw * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for j in 0..tw {
            let mut acc = 0.0;
            for (t, k) in KERNEL.iter().enumerate() {
                let jj = mirror(j as isize + t as isize - 2, tw);
                // odd target positions hold inserted zeros
                if jj.is_multiple_of(2) {
                    acc += 2.0 * k * row[jj / 2];
                }
            }
            out[y * tw + j] = acc;
        }
    }
    out
}

fn up_pass_v(plane: &[f64], w: usize, th: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * th];
    for j in 0..th {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, k) in KERNEL.iter().enumerate() {
                let jj = mirror(j as isize + t as isize - 2, th);
                if jj.is_multiple_of(2) {
                    acc += 2.0 * k * plane[(jj / 2) * w + x];
                }
            }
            out[j * w + x] = acc;
        }
    }
    out
}

/// Blur with the binomial kernel and keep even rows/columns. Output is
/// `ceil(w/2) x ceil(h/2)`.
pub fn blur_downsample(frame: &Frame) -> Result<Frame> {
    let (w, h) = (frame.width(), frame.height());
    if w < 2 || h < 2 {
        return Err(Error::TooSmall {
            width: w,
            height: h,
        });
    }
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let mut samples = Vec::with_capacity(ow * oh * frame.channels());
    for c in 0..frame.channels() {
        let hori = down_pass_h(frame.plane(c), w, h);
        samples.extend(down_pass_v(&hori, ow, h));
    }
    Ok(Frame::from_raw(ow, oh, frame.channels(), samples))
}

/// Expand to `target_w x target_h`, which must halve (ceiling) back to the
/// input dimensions.
pub fn upsample(frame: &Frame, target_w: usize, target_h: usize) -> Result<Frame> {
    let (w, h) = (frame.width(), frame.height());
    if target_w.div_ceil(2) != w || target_h.div_ceil(2) != h {
        return Err(Error::BadTargetDims {
            src_w: w,
            src_h: h,
            target_w,
            target_h,
        });
    }
    let mut samples = Vec::with_capacity(target_w * target_h * frame.channels());
    for c in 0..frame.channels() {
        let hori = up_pass_h(frame.plane(c), w, h, target_w);
        samples.extend(up_pass_v(&hori, target_w, target_h));
    }
    Ok(Frame::from_raw(
        target_w,
        target_h,
        frame.channels(),
        samples,
    ))
}

fn check_depth(frame: &Frame, depth: usize) -> Result<()> {
    let min_dim = frame.width().min(frame.height());
    // min/2^(depth-1) >= 2, kept in integer form
    let ok = (1..64).contains(&depth) && min_dim >= (1usize << depth);
    if ok {
        Ok(())
    } else {
        Err(Error::DepthTooLarge {
            depth,
            width: frame.width(),
            height: frame.height(),
        })
    }
}

/// Gaussian pyramid: level 0 is the input, each level halves (ceiling).
pub fn build_gaussian(frame: &Frame, depth: usize) -> Result<Vec<Frame>> {
    check_depth(frame, depth)?;
    let mut levels = Vec::with_capacity(depth);
    levels.push(frame.clone());
    for _ in 1..depth {
        let next = blur_downsample(levels.last().unwrap())?;
        levels.push(next);
    }
    Ok(levels)
}

/// Laplacian pyramid with `depth - 1` detail bands and a lowpass residual.
pub fn build_laplacian(frame: &Frame, depth: usize) -> Result<LaplacianPyramid> {
    let gaussian = build_gaussian(frame, depth)?;
    let mut bands = Vec::with_capacity(depth - 1);
    for k in 0..depth - 1 {
        let fine = &gaussian[k];
        let up = upsample(&gaussian[k + 1], fine.width(), fine.height())?;
        let diff: Vec<f64> = fine
            .samples()
            .iter()
            .zip(up.samples())
            .map(|(a, b)| a - b)
            .collect();
        bands.push(Frame::from_raw(
            fine.width(),
            fine.height(),
            fine.channels(),
            diff,
        ));
    }
    Ok(LaplacianPyramid {
        bands,
        residual: gaussian.into_iter().last().unwrap(),
    })
}

/// Invert [`build_laplacian`]: upsample-and-add from the residual outward.
pub fn collapse(pyramid: &LaplacianPyramid) -> Result<Frame> {
    let mut current = pyramid.residual.clone();
    for band in pyramid.bands.iter().rev() {
        let chains = band.width().div_ceil(2) == current.width()
            && band.height().div_ceil(2) == current.height()
            && band.channels() == current.channels();
        if !chains {
            return Err(Error::ShapeMismatch(format!(
                "band {}x{}x{} cannot sit above level {}x{}x{}",
                band.width(),
                band.height(),
                band.channels(),
                current.width(),
                current.height(),
                current.channels()
            )));
        }
        let up = upsample(&current, band.width(), band.height())?;
        let sum: Vec<f64> = band
            .samples()
            .iter()
            .zip(up.samples())
            .map(|(a, b)| a + b)
            .collect();
        current = Frame::from_raw(band.width(), band.height(), band.channels(), sum);
    }
    Ok(current)
}

/// Deepest decomposition whose residual keeps a minimum dimension of 16,
/// capped at 6 levels and floored at 1.
pub fn default_depth(width: usize, height: usize) -> usize {
    let min_dim = width.min(height);
    let mut depth = 1;
    while depth < 6 && min_dim >= 16 << depth {
        depth += 1;
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_frame(w: usize, h: usize, c: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::new(w, h, c, (0..w * h * c).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    fn max_abs_diff(a: &Frame, b: &Frame) -> f64 {
        a.samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    // Reference blur/decimate written as a direct 2-D convolution so the
    // separable production path is checked against an independent route.
    #[allow(clippy::needless_range_loop)]
    fn reference_downsample(f: &Frame) -> Frame {
        let (w, h) = (f.width(), f.height());
        let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
        let mut samples = Vec::new();
        for c in 0..f.channels() {
            let plane = f.plane(c);
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = 0.0;
                    for ky in 0..5usize {
                        for kx in 0..5usize {
                            let sy = mirror(2 * oy as isize + ky as isize - 2, h);
                            let sx = mirror(2 * ox as isize + kx as isize - 2, w);
                            acc += KERNEL[ky] * KERNEL[kx] * plane[sy * w + sx];
                        }
                    }
                    samples.push(acc);
                }
            }
        }
        Frame::from_raw(ow, oh, f.channels(), samples)
    }

    #[allow(clippy::needless_range_loop)]
    fn reference_upsample(f: &Frame, tw: usize, th: usize) -> Frame {
        let (w, h) = (f.width(), f.height());
        let mut samples = Vec::new();
        for c in 0..f.channels() {
            let plane = f.plane(c);
            // explicit zero-inserted grid
            let mut grid = vec![0.0; tw * th];
            for y in 0..h {
                for x in 0..w {
                    if 2 * x < tw && 2 * y < th {
                        grid[2 * y * tw + 2 * x] = plane[y * w + x];
                    }
                }
            }
            for y in 0..th {
                for x in 0..tw {
                    let mut acc = 0.0;
                    for ky in 0..5usize {
                        for kx in 0..5usize {
                            let sy = mirror(y as isize + ky as isize - 2, th);
                            let sx = mirror(x as isize + kx as isize - 2, tw);
                            acc += 4.0 * KERNEL[ky] * KERNEL[kx] * grid[sy * tw + sx];
                        }
                    }
                    samples.push(acc);
                }
            }
        }
        Frame::from_raw(tw, th, f.channels(), samples)
    }

    #[test]
    fn centered_impulse_keeps_the_kernel_center_weight() {
        // hand value: outer-product kernel center is (6/16)^2 = 36/256, and
        // decimation maps input (2,2) to output (1,1)
        let mut f = Frame::filled(5, 5, 1, 0.0).unwrap();
        f.set_sample(2, 2, 0, 1.0);
        let d = blur_downsample(&f).unwrap();
        assert_eq!((d.width(), d.height()), (3, 3));
        assert!((d.sample(1, 1, 0) - 36.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn downsample_dims_follow_ceiling_halving() {
        for (w, h, ew, eh) in [(5, 5, 3, 3), (4, 4, 2, 2), (7, 3, 4, 2), (2, 2, 1, 1)] {
            let d = blur_downsample(&random_frame(w, h, 1, 1)).unwrap();
            assert_eq!((d.width(), d.height()), (ew, eh), "{w}x{h}");
        }
    }

    #[test]
    fn downsample_rejects_degenerate_frames() {
        let thin = Frame::filled(1, 8, 1, 0.5).unwrap();
        assert!(matches!(
            blur_downsample(&thin).unwrap_err(),
            Error::TooSmall { .. }
        ));
        let flat = Frame::filled(8, 1, 1, 0.5).unwrap();
        assert!(matches!(
            blur_downsample(&flat).unwrap_err(),
            Error::TooSmall { .. }
        ));
    }

    #[test]
    fn downsample_matches_direct_2d_convolution() {
        let f = random_frame(11, 7, 3, 2);
        let got = blur_downsample(&f).unwrap();
        let want = reference_downsample(&f);
        assert!(max_abs_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn upsample_matches_zero_insertion_reference() {
        let f = random_frame(6, 5, 1, 3);
        for (tw, th) in [(11, 9), (12, 10), (11, 10), (12, 9)] {
            let got = upsample(&f, tw, th).unwrap();
            let want = reference_upsample(&f, tw, th);
            assert!(max_abs_diff(&got, &want) < 1e-12, "{tw}x{th}");
        }
    }

    #[test]
    fn upsample_validates_target_dims() {
        let f = random_frame(3, 3, 1, 4);
        assert!(upsample(&f, 5, 5).is_ok());
        assert!(upsample(&f, 6, 6).is_ok());
        for (tw, th) in [(7, 7), (4, 6), (6, 4), (6, 7)] {
            assert!(
                matches!(
                    upsample(&f, tw, th).unwrap_err(),
                    Error::BadTargetDims { .. }
                ),
                "{tw}x{th}"
            );
        }
    }

    #[test]
    fn upsample_preserves_constants_on_both_phases() {
        let f = Frame::filled(4, 4, 1, 0.37).unwrap();
        for (tw, th) in [(8, 8), (7, 7), (8, 7)] {
            let up = upsample(&f, tw, th).unwrap();
            for &v in up.samples() {
                assert!((v - 0.37).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gaussian_levels_shrink_and_depth_guard_fires() {
        let f = random_frame(64, 48, 1, 5);
        let levels = build_gaussian(&f, 4).unwrap();
        let dims: Vec<_> = levels.iter().map(|l| (l.width(), l.height())).collect();
        assert_eq!(dims, vec![(64, 48), (32, 24), (16, 12), (8, 6)]);

        let small = random_frame(8, 8, 1, 6);
        assert!(build_gaussian(&small, 3).is_ok());
        assert!(matches!(
            build_gaussian(&small, 4).unwrap_err(),
            Error::DepthTooLarge { .. }
        ));
        assert!(matches!(
            build_gaussian(&small, 0).unwrap_err(),
            Error::DepthTooLarge { .. }
        ));
    }

    #[test]
    fn laplacian_bands_match_independent_reference() {
        let f = random_frame(16, 16, 1, 7);
        let pyr = build_laplacian(&f, 3).unwrap();
        let g1 = reference_downsample(&f);
        let g2 = reference_downsample(&g1);
        let want0: Vec<f64> = f
            .samples()
            .iter()
            .zip(reference_upsample(&g1, 16, 16).samples())
            .map(|(a, b)| a - b)
            .collect();
        let want1: Vec<f64> = g1
            .samples()
            .iter()
            .zip(reference_upsample(&g2, 8, 8).samples())
            .map(|(a, b)| a - b)
            .collect();
        for (got, want) in pyr.bands[0].samples().iter().zip(&want0) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in pyr.bands[1].samples().iter().zip(&want1) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(max_abs_diff(&pyr.residual, &g2) < 1e-12);

        // white noise concentrates energy in the finest band
        let energy = |fr: &Frame| {
            fr.samples().iter().map(|v| v * v).sum::<f64>() / fr.samples().len() as f64
        };
        assert!(energy(&pyr.bands[0]) > energy(&pyr.bands[1]));
    }

    #[test]
    fn depth_one_laplacian_is_just_the_residual() {
        let f = random_frame(5, 4, 3, 8);
        let pyr = build_laplacian(&f, 1).unwrap();
        assert!(pyr.bands.is_empty());
        assert_eq!(pyr.residual, f);
        assert_eq!(collapse(&pyr).unwrap(), f);
    }

    #[test]
    fn collapse_inverts_build_laplacian() {
        for (w, h, depth, seed) in [
            (16, 16, 3, 9),
            (17, 13, 3, 10),
            (33, 20, 4, 11),
            (8, 8, 3, 12),
        ] {
            let f = random_frame(w, h, 3, seed);
            let pyr = build_laplacian(&f, depth).unwrap();
            let back = collapse(&pyr).unwrap();
            assert!(max_abs_diff(&f, &back) < 1e-6, "{w}x{h} depth {depth}");
        }
    }

    #[test]
    fn collapse_rejects_broken_level_chains() {
        let f = random_frame(16, 16, 1, 13);
        let mut pyr = build_laplacian(&f, 3).unwrap();
        pyr.bands[1] = random_frame(9, 9, 1, 14); // ceil(9/2) = 5 != 4
        assert!(matches!(
            collapse(&pyr).unwrap_err(),
            Error::ShapeMismatch(_)
        ));
    }

    #[test]
    fn default_depth_keeps_a_16px_residual_and_caps_at_six() {
        assert_eq!(default_depth(16, 16), 1);
        assert_eq!(default_depth(32, 32), 2);
        assert_eq!(default_depth(32, 31), 1);
        assert_eq!(default_depth(256, 128), 4);
        assert_eq!(default_depth(1920, 1080), 6);
        assert_eq!(default_depth(4096, 4096), 6);
        assert_eq!(default_depth(4, 4), 1);
    }
}
