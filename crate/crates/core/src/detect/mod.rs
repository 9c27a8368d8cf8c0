//! Classical texel detector for clean renders and per-image detection scoring.

mod background;
mod evaluate;
mod shape;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::color::ColorName;
use crate::raster::{BitMask, RasterImage};
use crate::texel::{ShapeClass, TexelRecord};

pub use background::estimate_background;
pub use evaluate::{evaluate_detection, evaluate_masks, match_detections, DetectionScore, IOU_THRESHOLDS};
pub use shape::{
    classify_shape, classify_shape_with, pooled_radial_spread, radial_profile, shape_metrics, ShapeMetrics,
};

/// Detector thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// RGB distance from the background above which a pixel is foreground.
    pub background_threshold: f64,
    pub min_component_px: u64,
    pub circularity_threshold: f64,
    pub elongation_threshold: f64,
    /// Relabel components of one color by group-level evidence.
    pub group_consensus: bool,
    /// Pooled radial spread separating disks from polygons.
    pub radial_spread_threshold: f64,
    /// Minimum number of clean members for the pooled test.
    pub min_pool: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            background_threshold: 40.0,
            min_component_px: 9,
            circularity_threshold: 0.85,
            elongation_threshold: 8.0,
            group_consensus: true,
            radial_spread_threshold: 0.05,
            min_pool: 4,
        }
    }
}

pub fn segment_texels(image: &RasterImage) -> Vec<TexelRecord> {
    segment_texels_with(image, &DetectorConfig::default())
}

/// Foreground components of `image`, in raster order of their first pixel.
///
/// Neighboring foreground pixels (8-connectivity) join one component only
/// when their colors are within the background threshold of each other, so
/// touching texels of different colors stay apart.
pub fn segment_texels_with(image: &RasterImage, config: &DetectorConfig) -> Vec<TexelRecord> {
    let (w, h) = image.dims();
    let bg = estimate_background(image);
    let tau2 = config.background_threshold * config.background_threshold;
    let px = image.pixels();
    let fg: Vec<bool> = px.iter().map(|c| c.distance_sq(bg) > tau2).collect();
    let mut seen = vec![false; px.len()];
    let mut queue = VecDeque::new();
    let mut components = Vec::new();
    for start in 0..px.len() {
        if !fg[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w as usize) as i64, (i / w as usize) as i64);
            pixels.push((x as u32, y as u32));
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= i64::from(w) || ny >= i64::from(h) {
                        continue;
                    }
                    let j = ny as usize * w as usize + nx as usize;
                    if fg[j] && !seen[j] && px[i].distance_sq(px[j]) <= tau2 {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if pixels.len() as u64 >= config.min_component_px {
            components.push(pixels);
        }
    }

    let mut texels = Vec::with_capacity(components.len());
    for pixels in components {
        let mask = BitMask::from_pixels(w, h, pixels).expect("component pixels lie in the image");
        let metrics = shape_metrics(&mask).expect("component is nonempty");
        let class = shape::classify_metrics(&metrics, config);
        let color = image.mean_color(&mask).expect("component is nonempty").name();
        texels.push(Candidate { mask, metrics, class, color });
    }
    if config.group_consensus {
        apply_group_consensus(&mut texels, config);
    }
    texels
        .into_iter()
        .map(|t| TexelRecord::from_mask(t.mask, t.class, 1.0).expect("component is nonempty"))
        .collect()
}

struct Candidate {
    mask: BitMask,
    metrics: ShapeMetrics,
    class: ShapeClass,
    color: ColorName,
}

/// Components sharing a color name come from one texel group, so they share
/// a shape class. A cluster that is mostly lines becomes all lines (band
/// pieces cut off at image corners are short); otherwise the unclipped,
/// typically sized members vote through their pooled radial profile.
fn apply_group_consensus(texels: &mut [Candidate], config: &DetectorConfig) {
    let mut clusters: BTreeMap<ColorName, Vec<usize>> = BTreeMap::new();
    for (i, t) in texels.iter().enumerate() {
        clusters.entry(t.color).or_default().push(i);
    }
    for members in clusters.values() {
        let lines = members.iter().filter(|&&i| texels[i].class == ShapeClass::Line).count();
        if 2 * lines >= members.len() {
            for &i in members {
                texels[i].class = ShapeClass::Line;
            }
            continue;
        }
        let blobs: Vec<usize> = members.iter().copied().filter(|&i| texels[i].class != ShapeClass::Line).collect();
        let mut clean: Vec<usize> = blobs.iter().copied().filter(|&i| !texels[i].mask.touches_border()).collect();
        if clean.is_empty() {
            continue;
        }
        let mut areas: Vec<u64> = clean.iter().map(|&i| texels[i].metrics.area).collect();
        areas.sort_unstable();
        let median = areas[areas.len() / 2] as f64;
        clean.retain(|&i| {
            let a = texels[i].metrics.area as f64;
            a >= 0.5 * median && a <= 1.5 * median
        });
        if clean.len() < config.min_pool {
            continue;
        }
        let masks: Vec<&BitMask> = clean.iter().map(|&i| &texels[i].mask).collect();
        let spread = pooled_radial_spread(&masks).expect("pooled masks are nonempty");
        let class = if spread < config.radial_spread_threshold { ShapeClass::Circle } else { ShapeClass::Polygon };
        for i in blobs {
            texels[i].class = class;
        }
    }
}
