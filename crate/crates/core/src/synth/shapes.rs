//! Hard-edged rasterization: a pixel is covered when its center lies inside the shape.

use super::{PolygonKind, TexelShapeSpec};
use crate::texel::ShapeClass;
use crate::{Point, Vector};

pub(crate) struct Rasterized {
    /// In-image runs `(y, x_start, len)`.
    pub runs: Vec<(u32, u32, u32)>,
    /// Pixel count without clipping to the image (the in-image count for lines).
    pub unoccluded_area: u64,
}

pub(crate) fn rasterize(shape: &TexelShapeSpec, size: f64, center: Point, width: u32, height: u32) -> Rasterized {
    if shape.shape_class == ShapeClass::Line {
        let runs = band_runs(shape.orientation_deg, size, center, width, height);
        let area = runs.iter().map(|r| u64::from(r.2)).sum();
        return Rasterized { runs, unoccluded_area: area };
    }
    let inside = inside_test(shape, size);
    let reach = shape.extent() * size / shape.size / 2.0 + 1.0;
    let x_lo = (center.x - reach).floor() as i64;
    let x_hi = (center.x + reach).ceil() as i64;
    let y_lo = (center.y - reach).floor() as i64;
    let y_hi = (center.y + reach).ceil() as i64;
    let mut runs = Vec::new();
    let mut area = 0u64;
    for y in y_lo..=y_hi {
        let mut run_start: Option<i64> = None;
        for x in x_lo..=x_hi + 1 {
            let hit = x <= x_hi && inside(Vector::new(x as f64 + 0.5 - center.x, y as f64 + 0.5 - center.y));
            if hit {
                area += 1;
                if run_start.is_none() {
                    run_start = Some(x);
                }
            } else if let Some(s) = run_start.take() {
                push_clipped(&mut runs, y, s, x, width, height);
            }
        }
    }
    Rasterized { runs, unoccluded_area: area }
}

fn push_clipped(runs: &mut Vec<(u32, u32, u32)>, y: i64, x0: i64, x1: i64, width: u32, height: u32) {
    if y < 0 || y >= i64::from(height) {
        return;
    }
    let a = x0.max(0);
    let b = x1.min(i64::from(width));
    if b > a {
        runs.push((y as u32, a as u32, (b - a) as u32));
    }
}

/// Membership test on offsets from the center, in image coordinates.
fn inside_test(shape: &TexelShapeSpec, size: f64) -> Box<dyn Fn(Vector) -> bool> {
    let d = Vector::from_orientation_deg(shape.orientation_deg);
    let n = d.perp();
    match (shape.shape_class, shape.polygon_kind) {
        (ShapeClass::Polygon, Some(PolygonKind::Square)) => rect_test(d, n, size, size),
        (ShapeClass::Polygon, Some(PolygonKind::Rectangle)) => rect_test(d, n, size, size / shape.aspect),
        (ShapeClass::Polygon, Some(PolygonKind::Triangle)) => {
            let inradius = size / (2.0 * 3f64.sqrt());
            let normals: Vec<Vector> = (0..3)
                .map(|k| Vector::from_orientation_deg(shape.orientation_deg + 270.0 + 120.0 * f64::from(k)))
                .collect();
            Box::new(move |p: Vector| normals.iter().all(|m| p.dot(*m) <= inradius))
        }
        _ => {
            let r2 = (size / 2.0).powi(2);
            Box::new(move |p: Vector| p.norm_sq() < r2)
        }
    }
}

fn rect_test(d: Vector, n: Vector, long: f64, short: f64) -> Box<dyn Fn(Vector) -> bool> {
    Box::new(move |p: Vector| {
        let u = p.dot(d);
        let v = p.dot(n);
        (-long / 2.0..long / 2.0).contains(&u) && (-short / 2.0..short / 2.0).contains(&v)
    })
}

/// Full-span band `0 <= (p - anchor)·n < thickness` with `n` the band normal.
fn band_runs(orientation_deg: f64, thickness: f64, anchor: Point, width: u32, height: u32) -> Vec<(u32, u32, u32)> {
    let n = Vector::from_orientation_deg(orientation_deg).perp();
    let w = i64::from(width);
    let mut runs = Vec::new();
    for y in 0..height {
        let py = f64::from(y) + 0.5 - anchor.y;
        let inside = |x: i64| (0.0..thickness).contains(&Vector::new(x as f64 + 0.5 - anchor.x, py).dot(n));
        // Analytic interval first, then edges snapped to the exact pixel test.
        let m = n.dy * py - n.dx * anchor.x;
        let (mut x0, mut x1) = if n.dx.abs() < 1e-12 {
            if inside(0) { (0, w) } else { continue }
        } else {
            let a = -m / n.dx;
            let b = (thickness - m) / n.dx;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            (((lo - 0.5).ceil() as i64).clamp(0, w), ((hi - 0.5).ceil() as i64).clamp(0, w))
        };
        while x0 > 0 && inside(x0 - 1) {
            x0 -= 1;
        }
        while x0 < x1 && !inside(x0) {
            x0 += 1;
        }
        while x1 < w && inside(x1) {
            x1 += 1;
        }
        while x1 > x0 && !inside(x1 - 1) {
            x1 -= 1;
        }
        push_clipped(&mut runs, i64::from(y), x0, x1, width, height);
    }
    runs
}
