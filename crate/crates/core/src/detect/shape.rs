use std::f64::consts::{PI, TAU};

use super::DetectorConfig;
use crate::error::{Error, Result};
use crate::moments::{pixel_hull, polygon_perimeter, ray_exit, MaskMoments};
use crate::raster::BitMask;
use crate::texel::ShapeClass;
use crate::Vector;

/// Per-mask quantities behind [`classify_shape`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeMetrics {
    pub area: u64,
    /// Ratio of the principal-axis standard deviations.
    pub elongation: f64,
    /// `4πA / P²` with `A` the pixel count and `P` the perimeter of the
    /// convex hull of the pixel squares.
    pub circularity: f64,
    /// The mask reaches both the left and right, or both the top and bottom, image borders.
    pub spans_image: bool,
}

pub fn shape_metrics(mask: &BitMask) -> Result<ShapeMetrics> {
    let moments = MaskMoments::of(mask)?;
    let hull = pixel_hull(mask)?;
    let perimeter = polygon_perimeter(&hull);
    let area = mask.count();
    let b = mask.bbox()?;
    let spans_image =
        (b.x_min == 0 && b.x_max + 1 == mask.width()) || (b.y_min == 0 && b.y_max + 1 == mask.height());
    Ok(ShapeMetrics {
        area,
        elongation: moments.axis_ratio(),
        circularity: 4.0 * PI * area as f64 / (perimeter * perimeter),
        spans_image,
    })
}

/// Line when elongated or spanning the image, else circle or polygon by circularity.
pub fn classify_shape(mask: &BitMask) -> Result<ShapeClass> {
    classify_shape_with(mask, &DetectorConfig::default())
}

pub fn classify_shape_with(mask: &BitMask, config: &DetectorConfig) -> Result<ShapeClass> {
    Ok(classify_metrics(&shape_metrics(mask)?, config))
}

pub(crate) fn classify_metrics(m: &ShapeMetrics, config: &DetectorConfig) -> ShapeClass {
    if m.elongation >= config.elongation_threshold || m.spans_image {
        ShapeClass::Line
    } else if m.circularity >= config.circularity_threshold {
        ShapeClass::Circle
    } else {
        ShapeClass::Polygon
    }
}

const RAYS: usize = 64;

/// Radial profile of a mask: hull radius along evenly spaced directions from
/// the centroid, in units of the equal-area disk radius.
pub fn radial_profile(mask: &BitMask) -> Result<[f64; RAYS]> {
    let hull = pixel_hull(mask)?;
    let c = mask.centroid()?;
    let r0 = (mask.count() as f64 / PI).sqrt();
    let mut out = [0.0; RAYS];
    for (k, r) in out.iter_mut().enumerate() {
        let a = TAU * k as f64 / RAYS as f64;
        *r = ray_exit(&hull, c, Vector::new(a.cos(), a.sin())) / r0;
    }
    Ok(out)
}

/// Coefficient of variation of the mean radial profile of `masks`.
///
/// Texels of one group share shape and orientation, so averaging their
/// profiles cancels per-texel digitization noise while keeping corners. A
/// disk pools to a nearly flat profile; squares, triangles and rectangles do not.
pub fn pooled_radial_spread(masks: &[&BitMask]) -> Result<f64> {
    if masks.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut mean = [0.0; RAYS];
    for m in masks {
        for (acc, r) in mean.iter_mut().zip(radial_profile(m)?) {
            *acc += r / masks.len() as f64;
        }
    }
    let mu = mean.iter().sum::<f64>() / RAYS as f64;
    let var = mean.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / RAYS as f64;
    Ok(var.sqrt() / mu)
}
