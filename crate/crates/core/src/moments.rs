//! Second-order moments and convex hulls of pixel masks.

use crate::error::{Error, Result};
use crate::geometry::fold_deg;
use crate::raster::BitMask;
use crate::{Point, Vector};

/// Mean and population covariance of the set pixels' centers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskMoments {
    pub count: u64,
    pub mean: Point,
    pub cxx: f64,
    pub cxy: f64,
    pub cyy: f64,
}

fn sum_k(len: f64) -> f64 {
    len * (len - 1.0) / 2.0
}

fn sum_k2(len: f64) -> f64 {
    (len - 1.0) * len * (2.0 * len - 1.0) / 6.0
}

impl MaskMoments {
    pub fn of(mask: &BitMask) -> Result<Self> {
        let mean = mask.centroid()?;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for (y, x, len) in mask.runs() {
            let len = f64::from(len);
            let a = f64::from(x) + 0.5 - mean.x;
            let dy = f64::from(y) + 0.5 - mean.y;
            let sx = len * a + sum_k(len);
            sxx += len * a * a + 2.0 * a * sum_k(len) + sum_k2(len);
            sxy += dy * sx;
            syy += len * dy * dy;
        }
        let n = mask.count() as f64;
        Ok(Self { count: mask.count(), mean, cxx: sxx / n, cxy: sxy / n, cyy: syy / n })
    }

    /// Eigenvalues of the covariance, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = (self.cxx + self.cyy) / 2.0;
        let d = (((self.cxx - self.cyy) / 2.0).powi(2) + self.cxy * self.cxy).sqrt();
        (m + d, (m - d).max(0.0))
    }

    /// Ratio of the standard deviations along the principal axes.
    pub fn axis_ratio(&self) -> f64 {
        let (l1, l2) = self.eigenvalues();
        if l2 <= 0.0 {
            f64::INFINITY
        } else {
            (l1 / l2).sqrt()
        }
    }

    /// Orientation of the first principal axis in degrees, in `[0, 180)`.
    pub fn major_axis_deg(&self) -> f64 {
        // Image y points down; the reported convention has y up.
        let phi = 0.5 * (2.0 * self.cxy).atan2(self.cxx - self.cyy);
        fold_deg(-phi.to_degrees(), 180.0)
    }
}

/// Convex hull of the set pixels' corner points, counter-clockwise in image
/// coordinates, without repeated or collinear vertices.
pub fn pixel_hull(mask: &BitMask) -> Result<Vec<Point>> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut extremes: Vec<(u32, u32, u32)> = Vec::new();
    for (y, x, len) in mask.runs() {
        match extremes.last_mut() {
            Some(e) if e.0 == y => e.2 = x + len,
            _ => extremes.push((y, x, x + len)),
        }
    }
    let mut pts = Vec::with_capacity(extremes.len() * 4);
    for (y, x0, x1) in extremes {
        for (px, py) in [(x0, y), (x0, y + 1), (x1, y), (x1, y + 1)] {
            pts.push(Point::new(f64::from(px), f64::from(py)));
        }
    }
    Ok(convex_hull(pts))
}

/// Andrew's monotone chain.
pub fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

pub fn polygon_perimeter(poly: &[Point]) -> f64 {
    (0..poly.len()).map(|i| poly[i].distance(poly[(i + 1) % poly.len()])).sum()
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let twice: f64 = (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice.abs() / 2.0
}

/// Distance from `center` to the boundary of the convex polygon `poly` along
/// direction `dir` (a unit vector); `center` must lie inside.
pub fn ray_exit(poly: &[Point], center: Point, dir: Vector) -> f64 {
    let mut best = f64::INFINITY;
    let orient = if signed_area(poly) >= 0.0 { 1.0 } else { -1.0 };
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let e = b - a;
        // Outward normal of a counter-clockwise edge (in the chosen orientation).
        let n = Vector::new(e.dy, -e.dx) * orient;
        let denom = n.dot(dir);
        if denom > 1e-12 {
            let t = n.dot(a - center) / denom;
            if t >= 0.0 {
                best = best.min(t);
            }
        }
    }
    best
}

fn signed_area(poly: &[Point]) -> f64 {
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_hull() {
        let m = BitMask::from_runs(20, 20, (5..15).map(|y| (y, 5, 10))).unwrap();
        let hull = pixel_hull(&m).unwrap();
        assert_eq!(hull.len(), 4);
        assert_eq!(polygon_area(&hull), 100.0);
        assert_eq!(polygon_perimeter(&hull), 40.0);
        let c = m.centroid().unwrap();
        for k in 0..8 {
            let ang = f64::from(k) * std::f64::consts::FRAC_PI_4;
            let r = ray_exit(&hull, c, Vector::new(ang.cos(), ang.sin()));
            let expect = if k % 2 == 0 { 5.0 } else { 5.0 * 2f64.sqrt() };
            assert!((r - expect).abs() < 1e-9, "{k}: {r}");
        }
    }

    #[test]
    fn moments_of_bar() {
        let m = BitMask::from_runs(300, 20, (0..4).map(|y| (y, 0, 200))).unwrap();
        let mo = MaskMoments::of(&m).unwrap();
        assert!((mo.cxx - (200.0f64.powi(2) - 1.0) / 12.0).abs() < 1e-6);
        assert!((mo.cyy - 1.25).abs() < 1e-9);
        assert!(mo.cxy.abs() < 1e-9);
        assert!((mo.axis_ratio() - (3333.25f64 / 1.25).sqrt()).abs() < 1e-6);
        assert_eq!(mo.major_axis_deg(), 0.0);
    }
}
