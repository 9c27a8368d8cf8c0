//! Element-based texture pipeline: synthesis of annotated textures, classical
//! texel detection, individual and layout attributes, the 36-component
//! attribute descriptor, ranking evaluation and attribute-feedback search.
//!
//! Geometry and the statistical modules are generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix the precision used by the pipeline.

pub mod attributes;
pub mod color;
pub mod corpus;
pub mod descriptor;
pub mod error;
pub mod detect;
pub mod geometry;
pub mod layout_stats;
pub mod moments;
pub mod rank_eval;
pub mod raster;
pub mod scalar;
pub mod search;
pub mod synth;
pub mod texel;

pub use color::{color_name, ColorName, ColorRGB};
pub use error::{Error, Result};
pub use geometry::{Point2, Vector2};
pub use raster::{decode_png, encode_png, load_png, mask_to_bbox, save_png, BBox, BitMask, MaskRle, RasterImage};
pub use scalar::Scalar;
pub use texel::{ShapeClass, TexelRecord};

/// Scalar precision of the pipeline.
pub type Real = f64;
pub type Point = Point2<Real>;
pub type Vector = Vector2<Real>;
