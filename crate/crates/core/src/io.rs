//! Codec-free sequence i/o: directories of PNG frames and Y4M streams.
//!
//! PNG round trips are exact to 8-bit quantization (max error 1/510 per
//! sample). Y4M stores full-range BT.601 YCbCr, so an RGB round trip adds the
//! chroma matrix on top of quantization and is accurate to a few
//! quantization steps; GRAY sequences use `Cmono` and round trip like PNG.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Colorspace, Frame, FrameSequence};

/// On-disk layout for [`write_frames`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    /// Directory of `frame_000001.png` .. `frame_N.png`.
    PngSequence,
    /// Single `.y4m` stream.
    Y4m,
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn dequantize(v: u8) -> f64 {
    v as f64 / 255.0
}

/// Load a clip from `path`: a directory of numbered raster frames, or a Y4M
/// file. Always returns an RGB sequence with samples in `[0, 1]`. `fps`
/// applies to image directories; Y4M streams carry their own rate.
pub fn load_frames(path: &Path, fps: f64) -> Result<FrameSequence> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        load_png_dir(path, fps)
    } else {
        load_y4m(path)
    }
}

/// Write a clip to `path` in the requested layout. RGB and GRAY only;
/// convert YIQ back before writing.
pub fn write_frames(seq: &FrameSequence, path: &Path, format: FrameFormat) -> Result<()> {
    if seq.colorspace == Colorspace::Yiq {
        return Err(Error::InvalidParams(
            "YIQ sequences are intermediate data; convert to RGB before writing".into(),
        ));
    }
    match format {
        FrameFormat::PngSequence => write_png_dir(seq, path),
        FrameFormat::Y4m => write_y4m(seq, path),
    }
}

// ---- PNG sequence directories ----

fn frame_number(name: &str) -> Option<u64> {
    let stem = name.rsplit_once('.').map_or(name, |(s, _)| s);
    let digits = stem.strip_prefix("frame_")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn load_png_dir(dir: &Path, fps: f64) -> Result<FrameSequence> {
    let mut entries: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if let Some(n) = name.to_str().and_then(frame_number) {
            entries.push((n, entry.path()));
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    entries.sort();

    let mut frames = Vec::with_capacity(entries.len());
    for (_, p) in &entries {
        let img = image::open(p)
            .map_err(|e| Error::malformed(p, e.to_string()))?
            .to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let raw = img.into_raw();
        let n = w * h;
        let mut samples = vec![0.0; 3 * n];
        for i in 0..n {
            samples[i] = dequantize(raw[3 * i]);
            samples[n + i] = dequantize(raw[3 * i + 1]);
            samples[2 * n + i] = dequantize(raw[3 * i + 2]);
        }
        frames.push(Frame::from_raw(w, h, 3, samples));
    }
    let first = frames[0].clone();
    for (i, f) in frames.iter().enumerate() {
        if !f.same_shape(&first) {
            return Err(Error::DimensionMismatch(format!(
                "frame file {} is {}x{}, first frame is {}x{}",
                entries[i].1.display(),
                f.width(),
                f.height(),
                first.width(),
                first.height()
            )));
        }
    }
    FrameSequence::new(frames, fps, Colorspace::Rgb)
}

fn write_png_dir(seq: &FrameSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let n = seq.width() * seq.height();
    for (i, frame) in seq.frames.iter().enumerate() {
        let final_path = dir.join(format!("frame_{:06}.png", i + 1));
        let tmp_path = dir.join(format!(".frame_{:06}.png.tmp", i + 1));
        let bytes: Vec<u8> = match seq.colorspace {
            Colorspace::Rgb => {
                let (r, g, b) = (frame.plane(0), frame.plane(1), frame.plane(2));
                (0..n)
                    .flat_map(|j| [quantize(r[j]), quantize(g[j]), quantize(b[j])])
                    .collect()
            }
            Colorspace::Gray => frame.plane(0).iter().copied().map(quantize).collect(),
            Colorspace::Yiq => unreachable!("rejected above"),
        };
        let color = match seq.colorspace {
            Colorspace::Gray => image::ExtendedColorType::L8,
            _ => image::ExtendedColorType::Rgb8,
        };
        let file = fs::File::create(&tmp_path).map_err(|e| Error::io(&tmp_path, e))?;
        let encoder = image::codecs::png::PngEncoder::new(BufWriter::new(file));
        image::ImageEncoder::write_image(
            encoder,
            &bytes,
            seq.width() as u32,
            seq.height() as u32,
            color,
        )
        .map_err(|e| Error::malformed(&tmp_path, e.to_string()))?;
        fs::rename(&tmp_path, &final_path).map_err(|e| Error::io(&final_path, e))?;
    }
    Ok(())
}

// ---- Y4M streams ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Y4mChroma {
    C444,
    C420,
    Mono,
}

fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 0.5 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 0.5 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    (y, cb, cr)
}

fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let r = y + 1.402 * (cr - 0.5);
    let g = y - 0.344136 * (cb - 0.5) - 0.714136 * (cr - 0.5);
    let b = y + 1.772 * (cb - 0.5);
    (r.clamp(0.0, 1.0), g.clamp(0.0, 1.0), b.clamp(0.0, 1.0))
}

fn fps_to_ratio(fps: f64) -> (u64, u64) {
    let num = (fps * 1000.0).round() as u64;
    let g = gcd(num, 1000);
    (num / g, 1000 / g)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn write_y4m(seq: &FrameSequence, path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(p) = parent {
        fs::create_dir_all(p).map_err(|e| Error::io(p, e))?;
    }
    let tmp = path.with_file_name(format!(
        ".{}.tmp",
        path.file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("stream.y4m")
    ));
    let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    let (num, den) = fps_to_ratio(seq.fps);
    let chroma = match seq.colorspace {
        Colorspace::Gray => "mono",
        _ => "444",
    };
    let io_err = |e| Error::io(path, e);
    writeln!(
        w,
        "YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 C{} XCOLORRANGE=FULL",
        seq.width(),
        seq.height(),
        num,
        den,
        chroma
    )
    .map_err(io_err)?;
    let n = seq.width() * seq.height();
    for frame in &seq.frames {
        w.write_all(b"FRAME\n").map_err(io_err)?;
        match seq.colorspace {
            Colorspace::Gray => {
                let plane: Vec<u8> = frame.plane(0).iter().copied().map(quantize).collect();
                w.write_all(&plane).map_err(io_err)?;
            }
            _ => {
                let (r, g, b) = (frame.plane(0), frame.plane(1), frame.plane(2));
                let mut y = vec![0u8; n];
                let mut cb = vec![0u8; n];
                let mut cr = vec![0u8; n];
                for i in 0..n {
                    let (yv, cbv, crv) = rgb_to_ycbcr(r[i], g[i], b[i]);
                    y[i] = quantize(yv);
                    cb[i] = quantize(cbv);
                    cr[i] = quantize(crv);
                }
                w.write_all(&y).map_err(io_err)?;
                w.write_all(&cb).map_err(io_err)?;
                w.write_all(&cr).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn load_y4m(path: &Path) -> Result<FrameSequence> {
    let mut data = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| Error::io(path, e))?;

    let header_end = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::malformed(path, "missing header terminator"))?;
    let header = std::str::from_utf8(&data[..header_end])
        .map_err(|_| Error::malformed(path, "header is not utf-8"))?;
    let mut tokens = header.split_ascii_whitespace();
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(Error::malformed(path, "missing YUV4MPEG2 magic"));
    }

    let (mut width, mut height, mut fps) = (0usize, 0usize, 0.0f64);
    let mut chroma = Y4mChroma::C420; // y4m default when C is absent
    for tok in tokens {
        let (tag, val) = tok.split_at(1);
        match tag {
            "W" => width = val.parse().map_err(|_| Error::malformed(path, "bad W"))?,
            "H" => height = val.parse().map_err(|_| Error::malformed(path, "bad H"))?,
            "F" => {
                let (n, d) = val
                    .split_once(':')
                    .ok_or_else(|| Error::malformed(path, "bad F ratio"))?;
                let n: f64 = n
                    .parse()
                    .map_err(|_| Error::malformed(path, "bad F ratio"))?;
                let d: f64 = d
                    .parse()
                    .map_err(|_| Error::malformed(path, "bad F ratio"))?;
                if d <= 0.0 || n <= 0.0 {
                    return Err(Error::malformed(path, "non-positive frame rate"));
                }
                fps = n / d;
            }
            "C" => {
                chroma = match val {
                    "444" => Y4mChroma::C444,
                    "420" | "420jpeg" | "420mpeg2" | "420paldv" => Y4mChroma::C420,
                    "mono" => Y4mChroma::Mono,
                    other => {
                        return Err(Error::malformed(
                            path,
                            format!("unsupported chroma {other}"),
                        ))
                    }
                };
            }
            // interlacing, aspect and extension tags do not affect decoding here
            "I" | "A" | "X" => {}
            _ => return Err(Error::malformed(path, format!("unknown header tag {tok}"))),
        }
    }
    if width == 0 || height == 0 {
        return Err(Error::malformed(path, "missing or zero W/H"));
    }
    if fps == 0.0 {
        return Err(Error::malformed(path, "missing F tag"));
    }

    let n = width * height;
    let (cw, ch) = match chroma {
        Y4mChroma::C444 => (width, height),
        Y4mChroma::C420 => (width.div_ceil(2), height.div_ceil(2)),
        Y4mChroma::Mono => (0, 0),
    };
    let frame_bytes = n + 2 * cw * ch;

    let mut frames = Vec::new();
    let mut pos = header_end + 1;
    while pos < data.len() {
        let line_end = data[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::malformed(path, "truncated FRAME marker"))?
            + pos;
        if !data[pos..line_end].starts_with(b"FRAME") {
            return Err(Error::malformed(path, "expected FRAME marker"));
        }
        pos = line_end + 1;
        if pos + frame_bytes > data.len() {
            return Err(Error::malformed(path, "truncated frame payload"));
        }
        let y = &data[pos..pos + n];
        let mut samples = vec![0.0; 3 * n];
        match chroma {
            Y4mChroma::Mono => {
                for i in 0..n {
                    let v = dequantize(y[i]);
                    samples[i] = v;
                    samples[n + i] = v;
                    samples[2 * n + i] = v;
                }
            }
            Y4mChroma::C444 | Y4mChroma::C420 => {
                let cb = &data[pos + n..pos + n + cw * ch];
                let cr = &data[pos + n + cw * ch..pos + frame_bytes];
                for py in 0..height {
                    for px in 0..width {
                        let i = py * width + px;
                        let ci = match chroma {
                            Y4mChroma::C444 => i,
                            // nearest-neighbor chroma upsample
                            _ => (py / 2) * cw + px / 2,
                        };
                        let (r, g, b) =
                            ycbcr_to_rgb(dequantize(y[i]), dequantize(cb[ci]), dequantize(cr[ci]));
                        samples[i] = r;
                        samples[n + i] = g;
                        samples[2 * n + i] = b;
                    }
                }
            }
        }
        frames.push(Frame::from_raw(width, height, 3, samples));
        pos += frame_bytes;
    }
    if frames.is_empty() {
        return Err(Error::EmptyInput);
    }
    FrameSequence::new(frames, fps, Colorspace::Rgb)
}
