use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{harmonized_palette, LayoutSpec, PolygonKind, TexelShapeSpec, TextureGroup, TextureSpec};
use crate::color::ColorRGB;
use crate::error::{Error, Result};
use crate::texel::ShapeClass;
use crate::{Point, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Regular,
    Jittered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coloring {
    Mono,
    Bi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineWidth {
    Uniform,
    Nonuniform,
}

/// Restrictions on [`sample_spec`]; unset fields leave the choice to the sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskConstraints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shapes: Option<Vec<ShapeClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<Coloring>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_width: Option<LineWidth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_jitter: Option<f64>,
    /// Keeps texels of a group apart even under jitter; implies a single group.
    #[serde(default)]
    pub non_overlapping: bool,
    #[serde(default = "default_image_size")]
    pub image_size: u32,
}

fn default_image_size() -> u32 {
    1024
}

impl Default for TaskConstraints {
    fn default() -> Self {
        Self {
            shapes: None,
            regularity: None,
            coloring: None,
            line_width: None,
            max_jitter: None,
            non_overlapping: false,
            image_size: default_image_size(),
        }
    }
}

pub const SIZE_RANGE: (f64, f64) = (8.0, 64.0);
pub const JITTER_RANGE: (f64, f64) = (0.05, 0.45);
pub const SPACING_RANGE: (f64, f64) = (1.5, 4.0);
pub const ASPECT_RANGE: (f64, f64) = (1.5, 4.0);
/// Relative per-line thickness spread of non-uniform line groups.
pub const LINE_WIDTH_VARIATION: f64 = 0.5;
/// Minimum RGB distance between any two colors of a texture.
pub const MIN_COLOR_DISTANCE: f64 = 80.0;
/// Upper bound on the expected image fraction covered by one texel group, so
/// the background stays the modal color. Spacing is raised to honor it.
pub const MAX_COVERAGE: f64 = 0.35;
pub const MAX_COVERAGE_MULTI: f64 = 0.3;
const PALETTE_ATTEMPTS: usize = 1000;
/// Groups are laid out so that at least this many texels are expected.
pub const MIN_GROUP_TEXELS: f64 = 10.0;

impl TaskConstraints {
    fn allowed_shapes(&self) -> Result<Vec<ShapeClass>> {
        let contradiction = |m: &str| Err(Error::ContradictoryConstraints(m.into()));
        let mut shapes = match &self.shapes {
            Some(s) if s.is_empty() => return contradiction("empty shape set"),
            Some(s) => {
                let mut s = s.clone();
                s.sort();
                s.dedup();
                s
            }
            None => ShapeClass::ALL.to_vec(),
        };
        if self.line_width.is_some() {
            if !shapes.contains(&ShapeClass::Line) {
                return contradiction("line width constraint without line texels");
            }
            shapes = vec![ShapeClass::Line];
        }
        Ok(shapes)
    }

    fn jitter_cap(&self) -> Result<f64> {
        let cap = self.max_jitter.unwrap_or(JITTER_RANGE.1);
        if !(0.0..=1.0).contains(&cap) {
            return Err(Error::ContradictoryConstraints(format!("max_jitter {cap} outside [0, 1]")));
        }
        if self.regularity == Some(Regularity::Jittered) && cap < JITTER_RANGE.0 {
            return Err(Error::ContradictoryConstraints(format!(
                "jittered layout requested with max_jitter {cap} below {}",
                JITTER_RANGE.0
            )));
        }
        Ok(cap.min(JITTER_RANGE.1))
    }

    fn is_restricted(&self) -> bool {
        self.shapes.is_some() || self.regularity.is_some() || self.line_width.is_some() || self.non_overlapping
    }

    pub fn validate(&self) -> Result<()> {
        self.allowed_shapes()?;
        self.jitter_cap()?;
        if self.non_overlapping && self.coloring == Some(Coloring::Bi) {
            return Err(Error::ContradictoryConstraints("bi-color textures overlap by construction".into()));
        }
        if self.image_size < 64 {
            return Err(Error::ContradictoryConstraints(format!("image size {} below 64", self.image_size)));
        }
        Ok(())
    }
}

/// Draws a texture recipe uniformly over the parameter domains allowed by `constraints`.
pub fn sample_spec<R: Rng + ?Sized>(rng: &mut R, constraints: &TaskConstraints) -> Result<TextureSpec> {
    constraints.validate()?;
    let shapes = constraints.allowed_shapes()?;
    let jitter_cap = constraints.jitter_cap()?;
    let size = constraints.image_size;

    let n_groups = match constraints.coloring {
        Some(Coloring::Mono) => 1,
        Some(Coloring::Bi) => 2,
        // Any task restriction describes a single texel family unless bi-color is asked for.
        None if constraints.is_restricted() => 1,
        None => {
            if rng.random_bool(0.7) {
                1
            } else {
                2
            }
        }
    };
    let first = *shapes.choose(rng).expect("nonempty shape set");
    let classes: Vec<ShapeClass> = (0..n_groups)
        .map(|i| match (i, constraints.coloring) {
            (0, _) | (_, Some(Coloring::Bi)) => first,
            _ => *shapes.choose(rng).expect("nonempty shape set"),
        })
        .collect();

    let colors = sample_colors(rng, n_groups + 1)?;
    let groups = classes
        .iter()
        .zip(&colors[1..])
        .map(|(&class, &color)| sample_group(rng, constraints, n_groups, class, color, jitter_cap, size))
        .collect();
    Ok(TextureSpec { width: size, height: size, background: colors[0], groups, seed: rng.random() })
}

fn sample_colors<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Result<Vec<ColorRGB>> {
    for _ in 0..PALETTE_ATTEMPTS {
        let palette = harmonized_palette(rng, k)?;
        let names: HashSet<_> = palette.iter().map(|c| c.name()).collect();
        let separated = palette
            .iter()
            .enumerate()
            .all(|(i, a)| palette[i + 1..].iter().all(|b| a.distance(*b) > MIN_COLOR_DISTANCE));
        if names.len() == k && separated {
            return Ok(palette);
        }
    }
    Err(Error::ContradictoryConstraints(format!("no palette of {k} separable colors found")))
}

fn texel_area(shape: &TexelShapeSpec) -> f64 {
    let s = shape.size;
    match (shape.shape_class, shape.polygon_kind) {
        (ShapeClass::Polygon, Some(PolygonKind::Square)) => s * s,
        (ShapeClass::Polygon, Some(PolygonKind::Rectangle)) => s * s / shape.aspect,
        (ShapeClass::Polygon, Some(PolygonKind::Triangle)) => 3f64.sqrt() / 4.0 * s * s,
        (ShapeClass::Line, _) => s,
        _ => std::f64::consts::FRAC_PI_4 * s * s,
    }
}

fn sample_group<R: Rng + ?Sized>(
    rng: &mut R,
    constraints: &TaskConstraints,
    n_groups: usize,
    class: ShapeClass,
    color: ColorRGB,
    jitter_cap: f64,
    image_size: u32,
) -> TextureGroup {
    let coverage = if n_groups > 1 { MAX_COVERAGE_MULTI } else { MAX_COVERAGE };
    let extent = f64::from(image_size);
    // Full-span bands need spacing ≤ extent / (n + 1) to give n bands, which
    // with the coverage bound caps their thickness.
    let line_spacing_cap = extent / (MIN_GROUP_TEXELS + 1.0);
    let max_size = match class {
        ShapeClass::Line => (coverage * line_spacing_cap).min(SIZE_RANGE.1),
        _ => SIZE_RANGE.1,
    };
    let size = rng.random_range(SIZE_RANGE.0.min(max_size)..=max_size);
    let orientation = rng.random_range(0.0..180.0);
    let jittered = match constraints.regularity {
        Some(Regularity::Regular) => false,
        Some(Regularity::Jittered) => true,
        None => jitter_cap >= JITTER_RANGE.0 && rng.random_bool(0.5),
    };
    let jitter_frac = if jittered { rng.random_range(JITTER_RANGE.0..=jitter_cap) } else { 0.0 };

    let mut shape = match class {
        ShapeClass::Circle => TexelShapeSpec::circle(size, color),
        ShapeClass::Line => TexelShapeSpec::line(size, orientation, color),
        ShapeClass::Polygon => {
            let kind = *[PolygonKind::Square, PolygonKind::Triangle, PolygonKind::Rectangle]
                .choose(rng)
                .expect("nonempty");
            let mut s = TexelShapeSpec::polygon(kind, size, orientation, color);
            if kind == PolygonKind::Rectangle {
                s.aspect = rng.random_range(ASPECT_RANGE.0..=ASPECT_RANGE.1);
            }
            s
        }
    };
    if class == ShapeClass::Line && constraints.line_width == Some(LineWidth::Nonuniform) {
        shape.size_variation = LINE_WIDTH_VARIATION;
    }
    // Every line group leaves room for the widest non-uniform band, so both
    // width classes share one spacing distribution.
    let footprint = match class {
        ShapeClass::Line => size * (1.0 + LINE_WIDTH_VARIATION),
        _ => shape.extent(),
    };
    let (alpha, beta, stretch) = if class == ShapeClass::Line {
        (0.0, 90.0, 1.0)
    } else {
        (rng.random_range(0.0..180.0), rng.random_range(60.0..=120.0), rng.random_range(1.0..=1.25))
    };
    let mut lower = (SPACING_RANGE.0 * size).max(footprint + 2.0);
    lower = lower.max(match class {
        ShapeClass::Line => size / coverage,
        _ => (texel_area(&shape) / (coverage * stretch * f64::to_radians(beta).sin())).sqrt(),
    });
    if constraints.non_overlapping {
        lower = lower.max((footprint + 2.0) / (1.0 - 2.0 * jitter_frac));
    }
    let count_cap = match class {
        ShapeClass::Line => line_spacing_cap,
        _ => (extent * extent / (1.5 * MIN_GROUP_TEXELS * stretch * f64::to_radians(beta).sin())).sqrt(),
    };
    let upper = (SPACING_RANGE.1 * size).min(count_cap).max(lower);
    let spacing = rng.random_range(lower..=upper);
    let phase = Point::new(rng.random_range(0.0..f64::from(image_size)), rng.random_range(0.0..f64::from(image_size)));

    let layout = match class {
        ShapeClass::Line => LayoutSpec {
            basis_u: Vector::from_orientation_deg(orientation).perp() * spacing,
            basis_v: None,
            jitter_frac,
            phase,
        },
        _ => LayoutSpec {
            basis_u: Vector::from_orientation_deg(alpha) * spacing,
            basis_v: Some(Vector::from_orientation_deg(alpha + beta) * (spacing * stretch)),
            jitter_frac,
            phase,
        },
    };
    TextureGroup { shape, layout }
}
