use std::f64::consts::TAU;

use rand::Rng;

use super::LayoutSpec;
use crate::error::Result;
use crate::{Point, Vector};

/// Axis-aligned region `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug)]
struct Region {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Region {
    fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x0, self.y1),
            Point::new(self.x1, self.y1),
        ]
    }

    fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }
}

fn jitter<R: Rng + ?Sized>(rng: &mut R, amplitude: f64) -> Vector {
    let r = amplitude * rng.random::<f64>().sqrt();
    let phi = TAU * rng.random::<f64>();
    Vector::new(r * phi.cos(), r * phi.sin())
}

fn index_range(values: impl Iterator<Item = f64>) -> (i64, i64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (lo.floor() as i64 - 1, hi.ceil() as i64 + 1)
}

/// Lattice sites of `layout` lying in `region`, each with its jittered position.
fn jittered_sites<R: Rng + ?Sized>(layout: &LayoutSpec, region: Region, rng: &mut R) -> Vec<(Point, Point)> {
    let amplitude = layout.jitter_frac * layout.min_basis_len();
    let u = layout.basis_u;
    let mut out = Vec::new();
    match layout.basis_v {
        Some(v) => {
            let det = u.cross(v);
            let coords = |p: Point| {
                let d = p - layout.phase;
                (d.cross(v) / det, u.cross(d) / det)
            };
            let corners = region.corners().map(coords);
            let (i0, i1) = index_range(corners.iter().map(|c| c.0));
            let (j0, j1) = index_range(corners.iter().map(|c| c.1));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let site = layout.phase + u * i as f64 + v * j as f64;
                    if region.contains(site) {
                        out.push((site, site + jitter(rng, amplitude)));
                    }
                }
            }
        }
        None => {
            let len2 = u.norm_sq();
            let (i0, i1) = index_range(region.corners().iter().map(|&c| (c - layout.phase).dot(u) / len2));
            for i in i0..=i1 {
                let site = layout.phase + u * i as f64;
                out.push((site, site + jitter(rng, amplitude)));
            }
        }
    }
    out
}

/// Jittered lattice positions falling inside the `width × height` image.
///
/// Sites are enumerated over the image extended by one basis length on every
/// side, so texels jittered in from outside are kept as well.
pub fn jitter_grid<R: Rng + ?Sized>(layout: &LayoutSpec, width: u32, height: u32, rng: &mut R) -> Result<Vec<Point>> {
    layout.validate()?;
    let ext = layout.max_basis_len();
    let region = Region { x0: -ext, y0: -ext, x1: f64::from(width) + ext, y1: f64::from(height) + ext };
    let image = Region { x0: 0.0, y0: 0.0, x1: f64::from(width), y1: f64::from(height) };
    Ok(jittered_sites(layout, region, rng).into_iter().map(|(_, p)| p).filter(|&p| image.contains(p)).collect())
}

/// Jittered anchors of a linear layout covering every band that may cross
/// the image; bands that end up missing the image are dropped by the caller.
pub(super) fn line_anchors<R: Rng + ?Sized>(
    layout: &LayoutSpec,
    max_thickness: f64,
    width: u32,
    height: u32,
    rng: &mut R,
) -> Result<Vec<Point>> {
    layout.validate()?;
    let ext = layout.max_basis_len() + max_thickness;
    let region = Region { x0: -ext, y0: -ext, x1: f64::from(width) + ext, y1: f64::from(height) + ext };
    let linear = LayoutSpec { basis_v: None, ..layout.clone() };
    Ok(jittered_sites(&linear, region, rng).into_iter().map(|(_, p)| p).collect())
}
