//! Pixel grids, binary masks with their row-major run-length JSON form, and PNG I/O.

use std::fs;
use std::io::{BufReader, Cursor};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::ColorRGB;
use crate::error::{Error, Result};
use crate::geometry::Point2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<ColorRGB>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: ColorRGB) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidSpec(format!("image dimensions {width}x{height}")));
        }
        Ok(Self { width, height, pixels: vec![fill; width as usize * height as usize] })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<ColorRGB>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidSpec(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[ColorRGB] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> ColorRGB {
        self.pixels[self.index(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, c: ColorRGB) {
        let i = self.index(x, y);
        self.pixels[i] = c;
    }

    fn index(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) outside {}x{}", self.width, self.height);
        y as usize * self.width as usize + x as usize
    }

    /// Mean color over the set bits of `mask`, rounded per channel.
    pub fn mean_color(&self, mask: &BitMask) -> Result<ColorRGB> {
        if mask.dims() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: mask.dims() });
        }
        let mut sum = [0u64; 3];
        let mut n = 0u64;
        for (x, y) in mask.iter() {
            let c = self.get(x, y);
            sum[0] += u64::from(c.r);
            sum[1] += u64::from(c.g);
            sum[2] += u64::from(c.b);
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyMask);
        }
        let avg = |s: u64| ((s as f64 / n as f64).round()).clamp(0.0, 255.0) as u8;
        Ok(ColorRGB::new(avg(sum[0]), avg(sum[1]), avg(sum[2])))
    }
}

/// Inclusive pixel bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BBox {
    pub fn width(&self) -> u32 {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min + 1
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn contains_point(&self, p: Point2<f64>) -> bool {
        p.x >= f64::from(self.x_min)
            && p.x <= f64::from(self.x_max) + 1.0
            && p.y >= f64::from(self.y_min)
            && p.y <= f64::from(self.y_max) + 1.0
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.x_min <= other.x_max
            && other.x_min <= self.x_max
            && self.y_min <= other.y_max
            && other.y_min <= self.y_max
    }
}

/// Binary occupancy over an owner image of `width × height` pixels.
///
/// Stored as maximal horizontal runs sorted in row-major order, so texel
/// masks stay small in large images and equal masks compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "MaskRle", try_from = "MaskRle")]
pub struct BitMask {
    width: u32,
    height: u32,
    runs: Vec<Run>,
    count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Run {
    y: u32,
    x: u32,
    len: u32,
}

impl Run {
    fn end(&self) -> u32 {
        self.x + self.len
    }
}

impl BitMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, runs: Vec::new(), count: 0 }
    }

    pub fn from_pixels<I>(width: u32, height: u32, pixels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        Self::from_runs(width, height, pixels.into_iter().map(|(x, y)| (y, x, 1)))
    }

    /// Builds a mask from possibly overlapping horizontal runs `(y, x_start, len)`.
    pub fn from_runs<I>(width: u32, height: u32, runs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, u32)>,
    {
        let mut raw = Vec::new();
        for (y, x, len) in runs {
            if len == 0 {
                continue;
            }
            if y >= height || x >= width || u64::from(x) + u64::from(len) > u64::from(width) {
                return Err(Error::InvalidSpec(format!(
                    "run at ({x},{y}) of length {len} outside {width}x{height}"
                )));
            }
            raw.push(Run { y, x, len });
        }
        raw.sort_unstable();
        let mut merged: Vec<Run> = Vec::with_capacity(raw.len());
        for r in raw {
            match merged.last_mut() {
                Some(last) if last.y == r.y && r.x <= last.end() => {
                    let end = last.end().max(r.end());
                    last.len = end - last.x;
                }
                _ => merged.push(r),
            }
        }
        let count = merged.iter().map(|r| u64::from(r.len)).sum();
        Ok(Self { width, height, runs: merged, count })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Index of the first run starting after `(x, y)` in row-major order.
    fn upper(&self, x: u32, y: u32) -> usize {
        self.runs.partition_point(|r| (r.y, r.x) <= (y, x))
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        let i = self.upper(x, y);
        i > 0 && {
            let r = self.runs[i - 1];
            r.y == y && x < r.end()
        }
    }

    pub fn set(&mut self, x: u32, y: u32) {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) outside {}x{}", self.width, self.height);
        if self.get(x, y) {
            return;
        }
        let i = self.upper(x, y);
        let joins_prev = i > 0 && self.runs[i - 1].y == y && self.runs[i - 1].end() == x;
        let joins_next = i < self.runs.len() && self.runs[i].y == y && self.runs[i].x == x + 1;
        match (joins_prev, joins_next) {
            (true, true) => {
                let next = self.runs.remove(i);
                self.runs[i - 1].len += 1 + next.len;
            }
            (true, false) => self.runs[i - 1].len += 1,
            (false, true) => {
                self.runs[i].x = x;
                self.runs[i].len += 1;
            }
            (false, false) => self.runs.insert(i, Run { y, x, len: 1 }),
        }
        self.count += 1;
    }

    /// Set pixels in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.runs.iter().flat_map(|r| (r.x..r.end()).map(move |x| (x, r.y)))
    }

    /// Maximal horizontal runs `(y, x_start, len)` in row-major order.
    pub fn runs(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.runs.iter().map(|r| (r.y, r.x, r.len))
    }

    pub fn bbox(&self) -> Result<BBox> {
        mask_to_bbox(self)
    }

    /// Mean of the set pixels' centers.
    pub fn centroid(&self) -> Result<Point2<f64>> {
        if self.is_empty() {
            return Err(Error::EmptyMask);
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for r in &self.runs {
            let len = f64::from(r.len);
            sx += len * (f64::from(r.x) + len / 2.0);
            sy += len * (f64::from(r.y) + 0.5);
        }
        let n = self.count as f64;
        Ok(Point2::new(sx / n, sy / n))
    }

    pub fn intersection_count(&self, other: &BitMask) -> u64 {
        let (mut i, mut j) = (0, 0);
        let mut total = 0u64;
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (self.runs[i], other.runs[j]);
            if a.y == b.y {
                let lo = a.x.max(b.x);
                let hi = a.end().min(b.end());
                if hi > lo {
                    total += u64::from(hi - lo);
                }
                if a.end() <= b.end() {
                    i += 1;
                } else {
                    j += 1;
                }
            } else if a.y < b.y {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    pub fn iou(&self, other: &BitMask) -> f64 {
        let inter = self.intersection_count(other);
        let union = self.count + other.count - inter;
        if union == 0 { 0.0 } else { inter as f64 / union as f64 }
    }

    pub fn touches_border(&self) -> bool {
        self.runs
            .iter()
            .any(|r| r.x == 0 || r.end() == self.width || r.y == 0 || r.y + 1 == self.height)
    }
}

/// Smallest inclusive box around the set bits.
pub fn mask_to_bbox(mask: &BitMask) -> Result<BBox> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let x_min = mask.runs.iter().map(|r| r.x).min().unwrap_or(0);
    let x_max = mask.runs.iter().map(|r| r.end() - 1).max().unwrap_or(0);
    let y_min = mask.runs.first().map_or(0, |r| r.y);
    let y_max = mask.runs.last().map_or(0, |r| r.y);
    Ok(BBox { x_min, y_min, x_max, y_max })
}

/// Row-major run-length form of a [`BitMask`]: `counts` alternates unset and
/// set run lengths over the flattened image, starting with an unset run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRle {
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u64>,
}

impl From<BitMask> for MaskRle {
    fn from(mask: BitMask) -> Self {
        MaskRle::from(&mask)
    }
}

impl From<&BitMask> for MaskRle {
    fn from(mask: &BitMask) -> Self {
        let width = u64::from(mask.width);
        let total = width * u64::from(mask.height);
        let mut counts = Vec::new();
        let mut pos = 0u64;
        let mut open: Option<(u64, u64)> = None;
        for (y, x, len) in mask.runs() {
            let start = u64::from(y) * width + u64::from(x);
            match open {
                Some((s, l)) if s + l == start => open = Some((s, l + u64::from(len))),
                Some((s, l)) => {
                    counts.push(s - pos);
                    counts.push(l);
                    pos = s + l;
                    open = Some((start, u64::from(len)));
                }
                None => open = Some((start, u64::from(len))),
            }
        }
        if let Some((s, l)) = open {
            counts.push(s - pos);
            counts.push(l);
            pos = s + l;
        }
        counts.push(total - pos);
        MaskRle { width: mask.width, height: mask.height, counts }
    }
}

impl TryFrom<MaskRle> for BitMask {
    type Error = Error;

    fn try_from(rle: MaskRle) -> Result<Self> {
        let width = u64::from(rle.width);
        let total = width * u64::from(rle.height);
        if rle.counts.iter().sum::<u64>() != total {
            return Err(Error::Malformed(format!(
                "run lengths sum to {} for a {}x{} mask",
                rle.counts.iter().sum::<u64>(),
                rle.width,
                rle.height
            )));
        }
        let mut runs = Vec::new();
        let mut pos = 0u64;
        for (i, &c) in rle.counts.iter().enumerate() {
            if i % 2 == 1 {
                let mut start = pos;
                let end = pos + c;
                while start < end {
                    let y = start / width;
                    let x = start % width;
                    let len = (end - start).min(width - x);
                    runs.push((y as u32, x as u32, len as u32));
                    start += len;
                }
            }
            pos += c;
        }
        BitMask::from_runs(rle.width, rle.height, runs)
    }
}

pub fn load_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_png(&bytes)
}

pub fn save_png(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(image)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Decodes 8-bit RGB or RGBA PNG data; alpha is discarded.
pub fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let decoder = png::Decoder::new(BufReader::new(Cursor::new(bytes)));
    let mut reader = decoder.read_info()?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedBitDepth(format!("{} bits per sample", depth as u8)));
    }
    let channels = match color {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => return Err(Error::UnsupportedImage(format!("color type {other:?}"))),
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::UnsupportedImage("image too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf)?;
    let (width, height) = (frame.width, frame.height);
    let stride = frame.line_size;
    let mut pixels = Vec::with_capacity(width as usize * height as usize);
    for row in buf[..frame.buffer_size()].chunks(stride).take(height as usize) {
        for px in row.chunks(channels).take(width as usize) {
            pixels.push(ColorRGB::new(px[0], px[1], px[2]));
        }
    }
    RasterImage::from_pixels(width, height, pixels)
}

pub fn encode_png(image: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width, image.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        let data: Vec<u8> = image.pixels.iter().flat_map(|c| [c.r, c.g, c.b]).collect();
        writer.write_image_data(&data)?;
        writer.finish()?;
    }
    Ok(out)
}
