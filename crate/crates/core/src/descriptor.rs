//! Texel grouping and the 36-component attribute descriptor with corpus
//! Z-normalization.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::attributes::{describe_texel, TexelAttributes};
use crate::color::{ColorName, ColorRGB};
use crate::detect::{estimate_background, segment_texels_with, DetectorConfig};
use crate::error::{Error, Result};
use crate::layout_stats::{layout_attributes, line_layout_attributes, LayoutAttributes, PointPattern, ORIENTATION_BINS};
use crate::raster::RasterImage;
use crate::synth::GroundTruth;
use crate::texel::{ShapeClass, TexelRecord};
use crate::Point;

pub const DESCRIPTOR_LEN: usize = 36;
/// Groups with fewer members are discarded.
pub const MIN_GROUP_SIZE: usize = 10;

pub const LABEL_HIST: Range<usize> = 0..3;
pub const COLOR_HIST: Range<usize> = 3..14;
pub const ORIENTATION_HIST: Range<usize> = 14..17;
pub const AREA: usize = 17;
pub const DENSITY: usize = 18;
pub const HOMOGENEITY: usize = 19;
pub const VECTOR_HIST: Range<usize> = 20..23;
pub const LOCAL_SYMMETRY: usize = 23;
pub const TRANSLATIONAL_SYMMETRY: usize = 24;
pub const BACKGROUND_HIST: Range<usize> = 25..36;

pub const COMPONENT_LABELS: [&str; DESCRIPTOR_LEN] = [
    "label_circle",
    "label_line",
    "label_polygon",
    "color_black",
    "color_white",
    "color_grey",
    "color_red",
    "color_orange",
    "color_yellow",
    "color_green",
    "color_blue",
    "color_purple",
    "color_pink",
    "color_brown",
    "orientation_0_60",
    "orientation_60_120",
    "orientation_120_180",
    "area",
    "density",
    "homogeneity",
    "vector_orientation_0_60",
    "vector_orientation_60_120",
    "vector_orientation_120_180",
    "local_symmetry",
    "translational_symmetry",
    "background_black",
    "background_white",
    "background_grey",
    "background_red",
    "background_orange",
    "background_yellow",
    "background_green",
    "background_blue",
    "background_purple",
    "background_pink",
    "background_brown",
];

pub fn component_index(label: &str) -> Option<usize> {
    COMPONENT_LABELS.iter().position(|&l| l == label)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TexelGroup {
    pub shape_class: ShapeClass,
    pub members: Vec<(TexelRecord, TexelAttributes)>,
}

/// One group per shape class present with at least [`MIN_GROUP_SIZE`] members,
/// in circle, line, polygon order.
pub fn group_texels(texels: Vec<(TexelRecord, TexelAttributes)>) -> Vec<TexelGroup> {
    let mut groups: Vec<TexelGroup> =
        ShapeClass::ALL.iter().map(|&c| TexelGroup { shape_class: c, members: Vec::new() }).collect();
    for t in texels {
        groups[t.1.shape_class.index()].members.push(t);
    }
    groups.retain(|g| g.members.len() >= MIN_GROUP_SIZE);
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "DescriptorJson", try_from = "DescriptorJson")]
pub struct Descriptor {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DescriptorJson {
    values: Vec<f64>,
    component_labels: Vec<String>,
}

impl From<Descriptor> for DescriptorJson {
    fn from(d: Descriptor) -> Self {
        Self { values: d.values, component_labels: COMPONENT_LABELS.iter().map(|s| s.to_string()).collect() }
    }
}

impl TryFrom<DescriptorJson> for Descriptor {
    type Error = Error;

    fn try_from(j: DescriptorJson) -> Result<Self> {
        if j.component_labels.iter().map(String::as_str).ne(COMPONENT_LABELS) {
            return Err(Error::Malformed("descriptor component labels differ from the expected order".into()));
        }
        Descriptor::new(j.values)
    }
}

impl Descriptor {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != DESCRIPTOR_LEN {
            return Err(Error::DescriptorLength { expected: DESCRIPTOR_LEN, got: values.len() });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        component_index(label).map(|i| self.values[i])
    }

    pub fn labels() -> &'static [&'static str; DESCRIPTOR_LEN] {
        &COMPONENT_LABELS
    }
}

fn normalize_into(out: &mut [f64], counts: &[usize]) {
    let total: usize = counts.iter().sum();
    if total > 0 {
        for (o, &c) in out.iter_mut().zip(counts) {
            *o = c as f64 / total as f64;
        }
    }
}

fn sorted_points(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    pts
}

fn group_layout(group: &TexelGroup, width: f64, height: f64) -> Result<LayoutAttributes<f64>> {
    if group.shape_class == ShapeClass::Line {
        let mut lines: Vec<(f64, Point)> = group
            .members
            .iter()
            .map(|(r, a)| (a.orientation_deg.unwrap_or(0.0), r.centroid))
            .collect();
        lines.sort_by(|a, b| a.1.y.total_cmp(&b.1.y).then(a.1.x.total_cmp(&b.1.x)).then(a.0.total_cmp(&b.0)));
        line_layout_attributes(&lines, width, height)
    } else {
        let pts = sorted_points(group.members.iter().map(|(r, _)| r.centroid).collect());
        layout_attributes(&PointPattern::new(pts, width, height)?)
    }
}

/// Texel histograms and mean area over all grouped members, member-weighted
/// mean of per-group layout attributes, and the one-hot background name.
/// Groups whose layout cannot be evaluated do not contribute to the layout block.
pub fn build_descriptor(groups: &[TexelGroup], window: (u32, u32), background: ColorRGB) -> Descriptor {
    let mut v = vec![0.0; DESCRIPTOR_LEN];
    let mut labels = [0usize; 3];
    let mut colors = [0usize; 11];
    let mut orientations = [0usize; ORIENTATION_BINS];
    let mut area = 0u64;
    let mut members = 0usize;
    let (width, height) = (f64::from(window.0), f64::from(window.1));
    let mut layout = LayoutAttributes::<f64>::default();
    let mut weight = 0.0;
    for g in groups {
        for (_, a) in &g.members {
            labels[a.shape_class.index()] += 1;
            colors[a.color_name.index()] += 1;
            if let Some(o) = a.orientation_deg {
                orientations[((o / 60.0).floor().max(0.0) as usize).min(ORIENTATION_BINS - 1)] += 1;
            }
            area += a.area_px;
        }
        members += g.members.len();
        if let Ok(l) = group_layout(g, width, height) {
            let w = g.members.len() as f64;
            layout.density += w * l.density;
            layout.homogeneity += w * l.homogeneity;
            for (acc, h) in layout.orientation_hist.iter_mut().zip(l.orientation_hist) {
                *acc += w * h;
            }
            layout.local_symmetry += w * l.local_symmetry;
            layout.translational_symmetry += w * l.translational_symmetry;
            weight += w;
        }
    }
    normalize_into(&mut v[LABEL_HIST], &labels);
    normalize_into(&mut v[COLOR_HIST], &colors);
    normalize_into(&mut v[ORIENTATION_HIST], &orientations);
    if members > 0 {
        v[AREA] = area as f64 / members as f64;
    }
    if weight > 0.0 {
        v[DENSITY] = layout.density / weight;
        v[HOMOGENEITY] = layout.homogeneity / weight;
        for (i, h) in VECTOR_HIST.zip(layout.orientation_hist) {
            v[i] = h / weight;
        }
        v[LOCAL_SYMMETRY] = layout.local_symmetry / weight;
        v[TRANSLATIONAL_SYMMETRY] = layout.translational_symmetry / weight;
    }
    v[BACKGROUND_HIST.start + background.name().index()] = 1.0;
    Descriptor { values: v }
}

/// Individual attributes of each record, measured on `image`.
pub fn attach_attributes(records: Vec<TexelRecord>, image: &RasterImage) -> Result<Vec<(TexelRecord, TexelAttributes)>> {
    records
        .into_iter()
        .map(|r| describe_texel(&r, image).map(|a| (r, a)))
        .collect()
}

/// Detection, attributes, grouping and descriptor for one image.
pub fn describe_image(image: &RasterImage, config: &DetectorConfig) -> Result<Descriptor> {
    let texels = attach_attributes(segment_texels_with(image, config), image)?;
    Ok(build_descriptor(&group_texels(texels), image.dims(), estimate_background(image)))
}

/// Descriptor of the annotated texels and declared background, bypassing detection.
pub fn describe_ground_truth(image: &RasterImage, truth: &GroundTruth) -> Result<Descriptor> {
    let texels = attach_attributes(truth.records(), image)?;
    Ok(build_descriptor(&group_texels(texels), truth.dims(), truth.spec.background))
}

/// Per-component population mean and standard deviation of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationModel {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub corpus_size: usize,
}

impl NormalizationModel {
    pub fn fit(corpus: &[Descriptor]) -> Result<Self> {
        if corpus.len() < 2 {
            return Err(Error::CorpusTooSmall { need: 2, got: corpus.len() });
        }
        let n = corpus.len() as f64;
        let mut mean = vec![0.0; DESCRIPTOR_LEN];
        let mut std = vec![0.0; DESCRIPTOR_LEN];
        for i in 0..DESCRIPTOR_LEN {
            let col = || corpus.iter().map(|d| d.values[i]);
            mean[i] = col().sum::<f64>() / n;
            let constant = col().all(|x| x == corpus[0].values[i]);
            if !constant {
                std[i] = (col().map(|x| (x - mean[i]) * (x - mean[i])).sum::<f64>() / n).sqrt();
            }
        }
        Ok(Self { mean, std, corpus_size: corpus.len() })
    }

    /// `(v - mean) / std`, with zero-variance components mapped to 0.
    pub fn apply(&self, d: &Descriptor) -> Descriptor {
        let values = d
            .values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect();
        Descriptor { values }
    }
}

/// Name of the color-histogram component for `name`.
pub fn color_component(name: ColorName) -> &'static str {
    COMPONENT_LABELS[COLOR_HIST.start + name.index()]
}
