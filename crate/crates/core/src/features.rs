//! Per-scene visual features: motion, brightness, contrast, saturation and
//! Total Visual Intensity.
//!
//! Every metric lives on [0, 1]. Motion is the mean absolute difference of
//! consecutive Gaussian-blurred luma frames; the colour metrics come from the
//! HSV value and saturation channels.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STRIDE: usize = 5;
pub const DEFAULT_KERNEL_SIZE: usize = 5;
pub const DEFAULT_SIGMA: f64 = 1.0;

pub const TVI_MOTION_WEIGHT: f64 = 0.5;
pub const TVI_CONTRAST_WEIGHT: f64 = 0.3;
pub const TVI_SATURATION_WEIGHT: f64 = 0.2;

pub const FEATURES_CSV_HEADER: [&str; 7] = [
    "scene_id",
    "frame_count_sampled",
    "motion",
    "brightness",
    "contrast",
    "saturation",
    "tvi",
];

/// An RGB frame with row-major interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "frame must be non-empty, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} frame needs {} bytes, got {}",
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, rgb.repeat(width * height))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn rgb(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }
}

/// Single-channel frame with values on [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    /// Absent for the first sampled frame of a scene.
    pub motion: Option<f64>,
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneVisualFeatures {
    pub scene_id: String,
    pub frame_count_sampled: usize,
    pub motion: f64,
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub tvi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub stride: usize,
    pub kernel_size: usize,
    pub sigma: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            stride: DEFAULT_STRIDE,
            kernel_size: DEFAULT_KERNEL_SIZE,
            sigma: DEFAULT_SIGMA,
        }
    }
}

/// Keep frames 0, stride, 2·stride, ...
pub fn sample_frames<I: IntoIterator>(frames: I, stride: usize) -> Result<impl Iterator<Item = I::Item>> {
    if stride == 0 {
        return Err(Error::InvalidConfig("sampling stride must be at least 1".into()));
    }
    Ok(frames.into_iter().step_by(stride))
}

pub fn luma(frame: &Frame) -> GrayFrame {
    GrayFrame {
        width: frame.width,
        height: frame.height,
        values: frame
            .rgb()
            .map(|[r, g, b]| {
                let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
                y.clamp(r.min(g).min(b) as f64, r.max(g).max(b) as f64)
            })
            .collect(),
    }
}

/// Normalized 1-D Gaussian weights.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::BadKernel { size, sigma });
    }
    if size == 1 {
        return Ok(vec![1.0]);
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::BadKernel { size, sigma });
    }
    let radius = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - radius;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Convolve along one axis with edge-replicate padding. Each output is clamped
/// to the range of its input window so that rounding cannot escape it.
fn convolve_axis(src: &[f64], width: usize, height: usize, kernel: &[f64], horizontal: bool) -> Vec<f64> {
    let radius = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (k, w) in kernel.iter().enumerate() {
                let offset = k as isize - radius;
                let (sx, sy) = if horizontal {
                    ((x as isize + offset).clamp(0, width as isize - 1) as usize, y)
                } else {
                    (x, (y as isize + offset).clamp(0, height as isize - 1) as usize)
                };
                let v = src[sy * width + sx];
                acc += w * v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            out[y * width + x] = acc.clamp(lo, hi);
        }
    }
    out
}

/// Luma conversion followed by a separable Gaussian blur.
pub fn gaussian_blur(frame: &Frame, kernel_size: usize, sigma: f64) -> Result<GrayFrame> {
    let kernel = gaussian_kernel(kernel_size, sigma)?;
    let gray = luma(frame);
    if kernel.len() == 1 {
        return Ok(gray);
    }
    let (w, h) = (gray.width, gray.height);
    let pass = convolve_axis(&gray.values, w, h, &kernel, true);
    let values = convolve_axis(&pass, w, h, &kernel, false);
    Ok(GrayFrame {
        width: w,
        height: h,
        values,
    })
}

/// Mean absolute difference of two blurred frames, scaled to [0, 1].
pub fn motion_metric(prev: &GrayFrame, curr: &GrayFrame) -> Result<f64> {
    if prev.width != curr.width || prev.height != curr.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            prev.width, prev.height, curr.width, curr.height
        )));
    }
    let n = prev.values.len() as f64;
    let total: f64 = prev.values.iter().zip(&curr.values).map(|(a, b)| (b - a).abs()).sum();
    Ok((total / n / 255.0).clamp(0.0, 1.0))
}

/// (brightness, contrast, saturation) from the HSV value and saturation
/// channels. Accumulated through integer histograms, so the result does not
/// depend on pixel order.
pub fn hsv_metrics(frame: &Frame) -> (f64, f64, f64) {
    let mut value_hist = [0u64; 256];
    // indexed by max * 256 + min
    let mut chroma_hist = vec![0u64; 256 * 256];
    for [r, g, b] in frame.rgb() {
        let max = r.max(g).max(b) as usize;
        let min = r.min(g).min(b) as usize;
        value_hist[max] += 1;
        chroma_hist[max * 256 + min] += 1;
    }
    let n = (frame.width * frame.height) as f64;

    let brightness = value_hist
        .iter()
        .enumerate()
        .map(|(v, &c)| c as f64 * v as f64)
        .sum::<f64>()
        / 255.0
        / n;
    let variance = value_hist
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            let d = v as f64 / 255.0 - brightness;
            c as f64 * d * d
        })
        .sum::<f64>()
        / n;
    let contrast = variance.sqrt().clamp(0.0, 1.0);
    let saturation = chroma_hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(idx, &c)| {
            let (max, min) = (idx / 256, idx % 256);
            let s = if max == 0 { 0.0 } else { (max - min) as f64 / max as f64 };
            c as f64 * s
        })
        .sum::<f64>()
        / n;
    (brightness, contrast, saturation)
}

/// 0.5·M + 0.3·C + 0.2·S.
pub fn tvi(motion: f64, contrast: f64, saturation: f64) -> Result<f64> {
    for (name, v) in [("motion", motion), ("contrast", contrast), ("saturation", saturation)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(format!("{name} = {v} is outside [0, 1]")));
        }
    }
    Ok(TVI_MOTION_WEIGHT * motion + TVI_CONTRAST_WEIGHT * contrast + TVI_SATURATION_WEIGHT * saturation)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Mean of each metric over the sampled frames. A scene with no frame pair
/// has motion 0.
pub fn aggregate_scene(scene_id: &str, metrics: &[FrameMetrics]) -> Result<SceneVisualFeatures> {
    if metrics.is_empty() {
        return Err(Error::EmptyScene(scene_id.to_string()));
    }
    let motion = mean(metrics.iter().filter_map(|m| m.motion)).unwrap_or(0.0);
    let brightness = mean(metrics.iter().map(|m| m.brightness)).unwrap_or(0.0);
    let contrast = mean(metrics.iter().map(|m| m.contrast)).unwrap_or(0.0);
    let saturation = mean(metrics.iter().map(|m| m.saturation)).unwrap_or(0.0);
    Ok(SceneVisualFeatures {
        scene_id: scene_id.to_string(),
        frame_count_sampled: metrics.len(),
        motion,
        brightness,
        contrast,
        saturation,
        tvi: tvi(motion, contrast, saturation)?,
    })
}

/// Per-frame metrics for an already-sampled frame sequence.
pub fn frame_metrics<I>(frames: I, config: &FeatureConfig) -> Result<Vec<FrameMetrics>>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut previous: Option<GrayFrame> = None;
    let mut out = Vec::new();
    for frame in frames {
        let frame = frame?;
        let blurred = gaussian_blur(&frame, config.kernel_size, config.sigma)?;
        let motion = previous.as_ref().map(|p| motion_metric(p, &blurred)).transpose()?;
        let (brightness, contrast, saturation) = hsv_metrics(&frame);
        out.push(FrameMetrics {
            motion,
            brightness,
            contrast,
            saturation,
        });
        previous = Some(blurred);
    }
    Ok(out)
}

/// Sample, measure and aggregate one scene.
pub fn extract_scene<I>(scene_id: &str, frames: I, config: &FeatureConfig) -> Result<SceneVisualFeatures>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let metrics = frame_metrics(sample_frames(frames, config.stride)?, config)?;
    aggregate_scene(scene_id, &metrics)
}

// ---------------------------------------------------------------------------
// NetPBM P6 I/O
// ---------------------------------------------------------------------------

fn read_token<R: BufRead>(reader: &mut R, path: &str) -> Result<String> {
    let bad = |reason: &str| Error::BadImage {
        path: path.to_string(),
        reason: reason.to_string(),
    };
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte)? == 0 {
            break;
        }
        let c = byte[0];
        if c == b'#' && token.is_empty() {
            let mut skip = Vec::new();
            reader.read_until(b'\n', &mut skip)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(c);
    }
    if token.is_empty() {
        return Err(bad("truncated header"));
    }
    String::from_utf8(token).map_err(|_| bad("non-ascii header"))
}

/// Decode a binary P6 image. Max values below 255 are rescaled to 255.
pub fn read_ppm<R: Read>(reader: R, path: &str) -> Result<Frame> {
    let bad = |reason: String| Error::BadImage {
        path: path.to_string(),
        reason,
    };
    let mut reader = BufReader::new(reader);
    let magic = read_token(&mut reader, path)?;
    if magic != "P6" {
        return Err(bad(format!("expected P6 magic, found {magic}")));
    }
    let mut dims = [0usize; 3];
    for (slot, name) in dims.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = read_token(&mut reader, path)?;
        *slot = tok.parse().map_err(|_| bad(format!("bad {name} `{tok}`")))?;
    }
    let [width, height, maxval] = dims;
    if !(1..=255).contains(&maxval) {
        return Err(bad(format!("unsupported maxval {maxval}")));
    }
    let mut pixels = vec![0u8; width * height * 3];
    reader
        .read_exact(&mut pixels)
        .map_err(|_| bad("pixel data truncated".into()))?;
    if maxval != 255 {
        for p in &mut pixels {
            if *p as usize > maxval {
                return Err(bad(format!("sample {p} exceeds maxval {maxval}")));
            }
            *p = ((*p as usize * 255 + maxval / 2) / maxval) as u8;
        }
    }
    Frame::new(width, height, pixels)
}

pub fn write_ppm<W: Write>(frame: &Frame, mut writer: W) -> Result<()> {
    write!(writer, "P6\n{} {}\n255\n", frame.width, frame.height)?;
    writer.write_all(&frame.pixels)?;
    Ok(())
}

pub fn load_ppm(path: &Path) -> Result<Frame> {
    read_ppm(File::open(path)?, &path.display().to_string())
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.ppm")
}

/// Frame files in `dir` named `frame_NNNNNN.ppm`, ordered by index.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut indexed = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(digits) = name.strip_prefix("frame_").and_then(|n| n.strip_suffix(".ppm")) else {
            continue;
        };
        if digits.len() == 6 && digits.bytes().all(|b| b.is_ascii_digit()) {
            indexed.push((digits.parse::<usize>().unwrap_or(usize::MAX), path));
        }
    }
    indexed.sort();
    Ok(indexed.into_iter().map(|(_, p)| p).collect())
}

/// Extract one scene from a directory of PPM frames. Only sampled frames are decoded.
pub fn extract_scene_dir(scene_id: &str, dir: &Path, config: &FeatureConfig) -> Result<SceneVisualFeatures> {
    let files = list_frame_files(dir)?;
    let sampled = sample_frames(&files, config.stride)?.map(|p| load_ppm(p));
    aggregate_scene(scene_id, &frame_metrics(sampled, config)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneManifestEntry {
    pub scene_id: String,
    pub frame_dir: PathBuf,
}

/// JSON-lines manifest; relative frame directories resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<SceneManifestEntry>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let reader = BufReader::new(File::open(path)?);
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut entry: SceneManifestEntry = serde_json::from_str(&line)
            .map_err(|e| Error::schema(format!("{} line {}", path.display(), idx + 1), e.to_string()))?;
        if entry.frame_dir.is_relative() {
            entry.frame_dir = base.join(&entry.frame_dir);
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Scenes are independent, so they are extracted in parallel; output keeps manifest order.
pub fn extract_manifest(entries: &[SceneManifestEntry], config: &FeatureConfig) -> Result<Vec<SceneVisualFeatures>> {
    entries
        .par_iter()
        .map(|e| extract_scene_dir(&e.scene_id, &e.frame_dir, config))
        .collect()
}

pub fn write_features_csv<W: Write>(scenes: &[SceneVisualFeatures], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(FEATURES_CSV_HEADER)?;
    for s in scenes {
        w.write_record([
            s.scene_id.clone(),
            s.frame_count_sampled.to_string(),
            format!("{:.6}", s.motion),
            format!("{:.6}", s.brightness),
            format!("{:.6}", s.contrast),
            format!("{:.6}", s.saturation),
            format!("{:.6}", s.tvi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_features_file(scenes: &[SceneVisualFeatures], path: &Path) -> Result<()> {
    write_features_csv(scenes, BufWriter::new(File::create(path)?))
}
