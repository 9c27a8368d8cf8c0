use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BBox, BitMask};
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Circle,
    Line,
    Polygon,
}

impl ShapeClass {
    /// Label-histogram order.
    pub const ALL: [ShapeClass; 3] = [ShapeClass::Circle, ShapeClass::Line, ShapeClass::Polygon];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeClass::Circle => "circle",
            ShapeClass::Line => "line",
            ShapeClass::Polygon => "polygon",
        }
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown shape class `{s}`")))
    }
}

/// One detected or annotated texel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TexelRecord {
    pub mask: BitMask,
    pub bbox: BBox,
    pub centroid: Point,
    pub shape_class: ShapeClass,
    pub confidence: f64,
}

impl TexelRecord {
    pub fn from_mask(mask: BitMask, shape_class: ShapeClass, confidence: f64) -> Result<Self> {
        let bbox = mask.bbox()?;
        let centroid = mask.centroid()?;
        Ok(Self { mask, bbox, centroid, shape_class, confidence })
    }
}
