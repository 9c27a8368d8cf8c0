//! Individual texel attributes: shape label, color name, orientation and area.

use serde::{Deserialize, Serialize};

use crate::color::{ColorName, ColorRGB};
use crate::error::{Error, Result};
use crate::moments::MaskMoments;
use crate::raster::{BitMask, RasterImage};
use crate::texel::{ShapeClass, TexelRecord};

/// Below this principal-axis standard deviation ratio a texel has no orientation.
pub const ISOTROPY_RATIO: f64 = 1.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TexelAttributes {
    pub shape_class: ShapeClass,
    pub color_name: ColorName,
    pub color_rgb: ColorRGB,
    pub orientation_deg: Option<f64>,
    pub area_px: u64,
}

/// First principal axis of the mask in `[0, 180)`, or `None` for isotropic masks.
pub fn texel_orientation(mask: &BitMask) -> Result<Option<f64>> {
    let m = MaskMoments::of(mask)?;
    Ok((m.axis_ratio() >= ISOTROPY_RATIO).then(|| m.major_axis_deg()))
}

pub fn describe_texel(record: &TexelRecord, image: &RasterImage) -> Result<TexelAttributes> {
    if record.mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let color_rgb = image.mean_color(&record.mask)?;
    Ok(TexelAttributes {
        shape_class: record.shape_class,
        color_name: color_rgb.name(),
        color_rgb,
        orientation_deg: texel_orientation(&record.mask)?,
        area_px: record.mask.count(),
    })
}
