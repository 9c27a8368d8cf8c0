//! Procedural element-based textures with exact ground truth.

mod layout;
mod palette;
mod sample;
mod shapes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::color::{ColorName, ColorRGB};
use crate::error::{Error, Result};
use crate::raster::{BBox, BitMask, RasterImage};
use crate::texel::{ShapeClass, TexelRecord};
use crate::{Point, Vector};

pub use layout::jitter_grid;
pub use palette::{harmonized_palette, harmonized_palette_with_rule, HarmonyRule};
pub use sample::{sample_spec, Coloring, LineWidth, Regularity, TaskConstraints};

/// Minimum visible fraction of a texel's unoccluded area for it to be kept.
pub const MIN_VISIBLE_FRACTION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolygonKind {
    Square,
    Triangle,
    Rectangle,
}

/// One texel class of a texture.
///
/// `size` is the circle diameter, line thickness, square or triangle edge, or
/// the long side of a rectangle (whose short side is `size / aspect`).
/// When `size_variation` is positive every texel draws its own size from
/// `[1 - v, 1 + v] × size`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TexelShapeSpec {
    pub shape_class: ShapeClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon_kind: Option<PolygonKind>,
    pub size: f64,
    pub orientation_deg: f64,
    pub color: ColorRGB,
    #[serde(default = "one")]
    pub aspect: f64,
    #[serde(default)]
    pub size_variation: f64,
}

fn one() -> f64 {
    1.0
}

impl TexelShapeSpec {
    pub fn circle(size: f64, color: ColorRGB) -> Self {
        Self::new(ShapeClass::Circle, None, size, 0.0, color)
    }

    pub fn line(thickness: f64, orientation_deg: f64, color: ColorRGB) -> Self {
        Self::new(ShapeClass::Line, None, thickness, orientation_deg, color)
    }

    pub fn polygon(kind: PolygonKind, size: f64, orientation_deg: f64, color: ColorRGB) -> Self {
        let aspect = if kind == PolygonKind::Rectangle { 2.0 } else { 1.0 };
        Self { aspect, ..Self::new(ShapeClass::Polygon, Some(kind), size, orientation_deg, color) }
    }

    fn new(
        shape_class: ShapeClass,
        polygon_kind: Option<PolygonKind>,
        size: f64,
        orientation_deg: f64,
        color: ColorRGB,
    ) -> Self {
        Self { shape_class, polygon_kind, size, orientation_deg, color, aspect: 1.0, size_variation: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !self.size.is_finite() || self.size < 3.0 {
            return bad(format!("texel size {} below 3 px", self.size));
        }
        if !(0.0..180.0).contains(&self.orientation_deg) {
            return bad(format!("orientation {} outside [0, 180)", self.orientation_deg));
        }
        if (self.shape_class == ShapeClass::Polygon) != self.polygon_kind.is_some() {
            return bad("polygon_kind must be given exactly for polygon texels".into());
        }
        if !self.aspect.is_finite() || self.aspect < 1.0 {
            return bad(format!("aspect {} below 1", self.aspect));
        }
        if !(0.0..1.0).contains(&self.size_variation) {
            return bad(format!("size_variation {} outside [0, 1)", self.size_variation));
        }
        Ok(())
    }

    /// Diameter of the circumscribed circle at nominal size.
    pub fn extent(&self) -> f64 {
        match (self.shape_class, self.polygon_kind) {
            (ShapeClass::Polygon, Some(PolygonKind::Square)) => self.size * std::f64::consts::SQRT_2,
            (ShapeClass::Polygon, Some(PolygonKind::Rectangle)) => self.size * (1.0 + self.aspect.powi(-2)).sqrt(),
            (ShapeClass::Polygon, Some(PolygonKind::Triangle)) => 2.0 * self.size / 3f64.sqrt(),
            _ => self.size,
        }
    }
}

/// Translation lattice of one texel group. Without `basis_v` the layout is
/// linear (used for line groups).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub basis_u: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_v: Option<Vector>,
    pub jitter_frac: f64,
    pub phase: Point,
}

impl LayoutSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: Vector| v.dx.is_finite() && v.dy.is_finite();
        if !finite(self.basis_u) || self.basis_u.norm() == 0.0 {
            return Err(Error::InvalidSpec("basis_u must be a finite nonzero vector".into()));
        }
        if let Some(v) = self.basis_v {
            if !finite(v) || v.norm() == 0.0 {
                return Err(Error::InvalidSpec("basis_v must be a finite nonzero vector".into()));
            }
            if self.basis_u.cross(v).abs() <= 1e-9 * self.basis_u.norm() * v.norm() {
                return Err(Error::InvalidSpec("degenerate basis: basis_u and basis_v are parallel".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.jitter_frac) {
            return Err(Error::InvalidSpec(format!("jitter_frac {} outside [0, 1]", self.jitter_frac)));
        }
        if !self.phase.x.is_finite() || !self.phase.y.is_finite() {
            return Err(Error::InvalidSpec("phase must be finite".into()));
        }
        Ok(())
    }

    pub fn min_basis_len(&self) -> f64 {
        let u = self.basis_u.norm();
        self.basis_v.map_or(u, |v| u.min(v.norm()))
    }

    pub fn max_basis_len(&self) -> f64 {
        let u = self.basis_u.norm();
        self.basis_v.map_or(u, |v| u.max(v.norm()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureGroup {
    pub shape: TexelShapeSpec,
    pub layout: LayoutSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureSpec {
    pub width: u32,
    pub height: u32,
    pub background: ColorRGB,
    pub groups: Vec<TextureGroup>,
    pub seed: u64,
}

impl TextureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidSpec(format!("image dimensions {}x{}", self.width, self.height)));
        }
        if self.groups.is_empty() || self.groups.len() > 2 {
            return Err(Error::InvalidSpec(format!("{} groups, expected 1 or 2", self.groups.len())));
        }
        let mut names = vec![self.background.name()];
        for g in &self.groups {
            g.shape.validate()?;
            g.layout.validate()?;
            if g.layout.jitter_frac == 0.0 {
                let need = g.shape.size + 2.0;
                for len in [Some(g.layout.basis_u.norm()), g.layout.basis_v.map(|v| v.norm())].into_iter().flatten() {
                    if len < need {
                        return Err(Error::InvalidSpec(format!(
                            "basis length {len:.2} below texel size + 2 px ({need:.2})"
                        )));
                    }
                }
            }
            names.push(g.shape.color.name());
        }
        for (i, a) in names.iter().enumerate() {
            if names[i + 1..].contains(a) {
                return Err(Error::InvalidSpec(format!("color name `{a}` used twice among groups and background")));
            }
        }
        Ok(())
    }
}

/// One annotated texel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTexel {
    pub group: usize,
    pub centroid: Point,
    pub bbox: BBox,
    pub mask: BitMask,
    pub shape_class: ShapeClass,
    pub color: ColorRGB,
    pub orientation_deg: Option<f64>,
    pub area_px: u64,
}

impl GroundTruthTexel {
    pub fn to_record(&self) -> TexelRecord {
        TexelRecord {
            mask: self.mask.clone(),
            bbox: self.bbox,
            centroid: self.centroid,
            shape_class: self.shape_class,
            confidence: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub texels: Vec<GroundTruthTexel>,
    pub layout_params: Vec<LayoutSpec>,
    pub spec: TextureSpec,
}

impl GroundTruth {
    pub fn records(&self) -> Vec<TexelRecord> {
        self.texels.iter().map(GroundTruthTexel::to_record).collect()
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.spec.width, self.spec.height)
    }
}

/// Paints `shape` centered at `center` (a point on the band for lines) and
/// returns the painted in-image mask, which is empty when the shape misses
/// the image.
pub fn render_texel(image: &mut RasterImage, shape: &TexelShapeSpec, center: Point) -> Result<BitMask> {
    shape.validate()?;
    let (w, h) = image.dims();
    let r = shapes::rasterize(shape, shape.size, center, w, h);
    let mask = BitMask::from_runs(w, h, r.runs)?;
    for (x, y) in mask.iter() {
        image.set(x, y, shape.color);
    }
    Ok(mask)
}

struct Candidate {
    group: usize,
    runs: Vec<(u32, u32, u32)>,
    unoccluded: u64,
}

const NO_OWNER: u32 = u32::MAX;

fn paint_owners(candidates: &[Candidate], keep: &[bool], width: u32, height: u32) -> Vec<u32> {
    let mut owner = vec![NO_OWNER; width as usize * height as usize];
    for (i, c) in candidates.iter().enumerate().filter(|(i, _)| keep[*i]) {
        for &(y, x, len) in &c.runs {
            let row = y as usize * width as usize;
            owner[row + x as usize..row + (x + len) as usize].fill(i as u32);
        }
    }
    owner
}

fn owned_runs(owner: &[u32], width: u32) -> Vec<Vec<(u32, u32, u32)>> {
    let mut out: Vec<Vec<(u32, u32, u32)>> = Vec::new();
    for (y, row) in owner.chunks(width as usize).enumerate() {
        let mut x = 0;
        while x < row.len() {
            let id = row[x];
            let start = x;
            while x < row.len() && row[x] == id {
                x += 1;
            }
            if id != NO_OWNER {
                let id = id as usize;
                if out.len() <= id {
                    out.resize_with(id + 1, Vec::new);
                }
                out[id].push((y as u32, start as u32, (x - start) as u32));
            }
        }
    }
    out
}

/// Renders `spec` and annotates every texel that stays at least
/// [`MIN_VISIBLE_FRACTION`] visible. Later groups paint over earlier ones.
pub fn generate_texture(spec: &TextureSpec) -> Result<(RasterImage, GroundTruth)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut candidates = Vec::new();
    for (gi, group) in spec.groups.iter().enumerate() {
        let shape = &group.shape;
        let positions = if shape.shape_class == ShapeClass::Line {
            layout::line_anchors(&group.layout, shape.size * (1.0 + shape.size_variation), w, h, &mut rng)?
        } else {
            jitter_grid(&group.layout, w, h, &mut rng)?
        };
        for p in positions {
            let size = if shape.size_variation > 0.0 {
                shape.size * rng.random_range(1.0 - shape.size_variation..=1.0 + shape.size_variation)
            } else {
                shape.size
            };
            let r = shapes::rasterize(shape, size, p, w, h);
            if r.runs.is_empty() {
                continue;
            }
            candidates.push(Candidate { group: gi, runs: r.runs, unoccluded: r.unoccluded_area });
        }
    }

    let all = vec![true; candidates.len()];
    let visible = owned_runs(&paint_owners(&candidates, &all, w, h), w);
    let keep: Vec<bool> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let seen: u64 = visible.get(i).map_or(0, |rs| rs.iter().map(|r| u64::from(r.2)).sum());
            seen > 0 && seen as f64 >= MIN_VISIBLE_FRACTION * c.unoccluded as f64
        })
        .collect();
    let owner = paint_owners(&candidates, &keep, w, h);

    let mut pixels = vec![spec.background; w as usize * h as usize];
    for (px, &o) in pixels.iter_mut().zip(&owner) {
        if o != NO_OWNER {
            *px = spec.groups[candidates[o as usize].group].shape.color;
        }
    }
    let image = RasterImage::from_pixels(w, h, pixels)?;

    let mut texels = Vec::new();
    for (i, runs) in owned_runs(&owner, w).into_iter().enumerate() {
        if runs.is_empty() {
            continue;
        }
        let c = &candidates[i];
        let shape = &spec.groups[c.group].shape;
        let mask = BitMask::from_runs(w, h, runs)?;
        let orientation_deg = match shape.shape_class {
            ShapeClass::Circle => None,
            _ => Some(shape.orientation_deg),
        };
        texels.push(GroundTruthTexel {
            group: c.group,
            centroid: mask.centroid()?,
            bbox: mask.bbox()?,
            area_px: mask.count(),
            mask,
            shape_class: shape.shape_class,
            color: shape.color,
            orientation_deg,
        });
    }
    let truth = GroundTruth {
        texels,
        layout_params: spec.groups.iter().map(|g| g.layout.clone()).collect(),
        spec: spec.clone(),
    };
    Ok((image, truth))
}

/// Names of the group colors and background, background first.
pub fn spec_color_names(spec: &TextureSpec) -> Vec<ColorName> {
    std::iter::once(spec.background.name()).chain(spec.groups.iter().map(|g| g.shape.color.name())).collect()
}
