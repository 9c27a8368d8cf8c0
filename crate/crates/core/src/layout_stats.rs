//! Layout attributes of texel-centroid point patterns: density, quadrat
//! homogeneity, pair-vector orientations and neighborhood symmetry scores.
//!
//! Line groups are reduced to a 1D pattern of band positions along the axis
//! perpendicular to their mean orientation ([`line_projection`]); the same
//! statistics then run with 2-point neighborhoods and 10 bins.

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fold_deg, Point2, Vector2};
use crate::scalar::Scalar;

/// Quadrats per axis (2D) or bins (1D) of the homogeneity statistic.
pub const QUADRATS: usize = 10;
pub const NEIGHBORS_2D: usize = 4;
pub const NEIGHBORS_1D: usize = 2;
pub const ORIENTATION_BINS: usize = 3;
/// Interior points keep this many median nearest-neighbor spacings from every window edge.
pub const INTERIOR_MARGIN: f64 = 1.5;
pub const MIN_HOMOGENEITY_POINTS: usize = 10;
pub const MIN_ORIENTATION_POINTS: usize = 5;
pub const MIN_SYMMETRY_POINTS: usize = 9;
pub const MIN_SYMMETRY_POINTS_1D: usize = 3;
pub const MIN_LINES: usize = 2;

/// Points in a `width × height` window, or positions on `[0, width]` for axial patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPattern<T> {
    points: Vec<Point2<T>>,
    width: T,
    height: T,
    axial: bool,
}

impl<T: Scalar> PointPattern<T> {
    pub fn new(points: Vec<Point2<T>>, width: T, height: T) -> Result<Self> {
        if !(width > T::zero() && height > T::zero()) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidSpec(format!("window {width}×{height} has zero area")));
        }
        Self::checked(points, width, height, false)
    }

    /// A 1D pattern of positions on `[0, extent]`, embedded at `y = 0`.
    pub fn axial(positions: Vec<T>, extent: T) -> Result<Self> {
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(Error::InvalidSpec(format!("extent {extent} is not positive")));
        }
        let points = positions.into_iter().map(|s| Point2::new(s, T::zero())).collect();
        Self::checked(points, extent, T::zero(), true)
    }

    fn checked(points: Vec<Point2<T>>, width: T, height: T, axial: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientPoints { need: 1, got: 0 });
        }
        let inside = |p: &Point2<T>| p.x >= T::zero() && p.x <= width && p.y >= T::zero() && p.y <= height;
        if let Some(p) = points.iter().find(|p| !inside(p)) {
            return Err(Error::InvalidSpec(format!("point ({}, {}) lies outside the window", p.x, p.y)));
        }
        Ok(Self { points, width, height, axial })
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> (T, T) {
        (self.width, self.height)
    }

    pub fn is_axial(&self) -> bool {
        self.axial
    }

    fn neighborhood(&self) -> usize {
        if self.axial {
            NEIGHBORS_1D
        } else {
            NEIGHBORS_2D
        }
    }

    fn contains_half_open(&self, p: Point2<T>) -> bool {
        p.x >= T::zero() && p.x < self.width && (self.axial || (p.y >= T::zero() && p.y < self.height))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutAttributes<T> {
    /// Points per px² (2D) or lines per px (1D).
    pub density: T,
    pub homogeneity: T,
    pub orientation_hist: [T; ORIENTATION_BINS],
    pub local_symmetry: T,
    pub translational_symmetry: T,
}

pub fn density<T: Scalar>(pattern: &PointPattern<T>) -> T {
    let n = T::of_usize(pattern.len());
    if pattern.axial {
        n / pattern.width
    } else {
        n / (pattern.width * pattern.height)
    }
}

/// Lines as `(orientation in degrees, anchor point on the line)`.
pub type LineTexel<T> = (T, Point2<T>);

/// Unit normal to the circular mean of axial orientations.
fn projection_axis<T: Scalar>(lines: &[LineTexel<T>]) -> Vector2<T> {
    let two = T::of(2.0);
    let (s, c) = lines.iter().fold((T::zero(), T::zero()), |(s, c), (deg, _)| {
        let r = deg.to_radians() * two;
        (s + r.sin(), c + r.cos())
    });
    let mean = s.atan2(c).to_degrees() / two;
    Vector2::from_orientation_deg(mean).perp()
}

/// Offset and length of the window's projection onto `axis`.
fn window_projection<T: Scalar>(width: T, height: T, axis: Vector2<T>) -> (T, T) {
    let corners = [(T::zero(), T::zero()), (width, T::zero()), (T::zero(), height), (width, height)];
    let proj: Vec<T> = corners.iter().map(|&(x, y)| x * axis.dx + y * axis.dy).collect();
    let lo = proj.iter().copied().fold(T::infinity(), T::min);
    let hi = proj.iter().copied().fold(T::neg_infinity(), T::max);
    (lo, hi - lo)
}

fn check_window<T: Scalar>(width: T, height: T) -> Result<()> {
    if width > T::zero() && height > T::zero() && width.is_finite() && height.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("window {width}×{height} has zero area")))
    }
}

/// Lines per px along the axis perpendicular to their mean orientation.
pub fn line_density<T: Scalar>(lines: &[LineTexel<T>], width: T, height: T) -> Result<T> {
    check_window(width, height)?;
    if lines.is_empty() {
        return Err(Error::InsufficientPoints { need: 1, got: 0 });
    }
    let (_, extent) = window_projection(width, height, projection_axis(lines));
    Ok(T::of_usize(lines.len()) / extent)
}

/// Positions of the line anchors on the axis perpendicular to their mean orientation.
pub fn line_projection<T: Scalar>(lines: &[LineTexel<T>], width: T, height: T) -> Result<PointPattern<T>> {
    check_window(width, height)?;
    if lines.len() < MIN_LINES {
        return Err(Error::InsufficientPoints { need: MIN_LINES, got: lines.len() });
    }
    let axis = projection_axis(lines);
    let (offset, extent) = window_projection(width, height, axis);
    let positions = lines
        .iter()
        .map(|(_, a)| (a.x * axis.dx + a.y * axis.dy - offset).max(T::zero()).min(extent))
        .collect();
    PointPattern::axial(positions, extent)
}

/// Pearson χ² of quadrat counts against the uniform expectation.
pub fn homogeneity_chi2<T: Scalar>(pattern: &PointPattern<T>) -> Result<T> {
    let n = pattern.len();
    if n < MIN_HOMOGENEITY_POINTS {
        return Err(Error::InsufficientPoints { need: MIN_HOMOGENEITY_POINTS, got: n });
    }
    let cell = |v: T, extent: T| ((v / extent * T::of_usize(QUADRATS)).floor().to_usize().unwrap_or(0)).min(QUADRATS - 1);
    let cells = if pattern.axial { QUADRATS } else { QUADRATS * QUADRATS };
    let mut counts = vec![0usize; cells];
    for p in &pattern.points {
        let i = if pattern.axial {
            cell(p.x, pattern.width)
        } else {
            cell(p.y, pattern.height) * QUADRATS + cell(p.x, pattern.width)
        };
        counts[i] += 1;
    }
    let expected = T::of_usize(n) / T::of_usize(cells);
    Ok(counts
        .into_iter()
        .map(|o| {
            let d = T::of_usize(o) - expected;
            d * d / expected
        })
        .sum())
}

struct NeighborIndex<T: Scalar> {
    tree: RTree<GeomWithData<[T; 2], usize>>,
}

impl<T: Scalar> NeighborIndex<T> {
    fn new(points: &[Point2<T>]) -> Self {
        let items = points.iter().enumerate().map(|(i, p)| GeomWithData::new([p.x, p.y], i)).collect();
        Self { tree: RTree::bulk_load(items) }
    }

    /// The `k` nearest other points of `points[i]` plus any points tied with the k-th.
    fn neighbors(&self, points: &[Point2<T>], i: usize, k: usize) -> Vec<(usize, T)> {
        let p = points[i];
        let slack = T::one() + T::tie_tolerance();
        let mut out: Vec<(usize, T)> = Vec::with_capacity(k + 2);
        for (item, d2) in self.tree.nearest_neighbor_iter_with_distance_2(&[p.x, p.y]) {
            if item.data == i {
                continue;
            }
            if out.len() >= k && d2 > out[k - 1].1 * slack {
                break;
            }
            out.push((item.data, d2));
        }
        out
    }

    fn nearest_distance(&self, probe: Point2<T>) -> T {
        self.tree
            .nearest_neighbor(&[probe.x, probe.y])
            .map(|item| {
                let [x, y] = *item.geom();
                probe.distance(Point2::new(x, y))
            })
            .unwrap_or(T::infinity())
    }
}

/// Median distance from each point to its nearest other point.
pub fn median_nn_spacing<T: Scalar>(pattern: &PointPattern<T>) -> Result<T> {
    if pattern.len() < 2 {
        return Err(Error::InsufficientPoints { need: 2, got: pattern.len() });
    }
    median_spacing(pattern, &NeighborIndex::new(&pattern.points))
}

fn median_spacing<T: Scalar>(pattern: &PointPattern<T>, index: &NeighborIndex<T>) -> Result<T> {
    let mut d: Vec<T> = (0..pattern.len())
        .map(|i| index.neighbors(&pattern.points, i, 1)[0].1.sqrt())
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = d.len() / 2;
    let median = if d.len() % 2 == 0 { (d[m - 1] + d[m]) / T::of(2.0) } else { d[m] };
    if median > T::zero() {
        Ok(median)
    } else {
        Err(Error::DegeneratePattern("median nearest-neighbor spacing is zero".into()))
    }
}

/// Indices of points at least [`INTERIOR_MARGIN`] spacings away from every window edge.
pub fn interior_points<T: Scalar>(pattern: &PointPattern<T>, spacing: T) -> Vec<usize> {
    let m = spacing * T::of(INTERIOR_MARGIN);
    let ok = |v: T, extent: T| v >= m && v <= extent - m;
    (0..pattern.len())
        .filter(|&i| {
            let p = pattern.points[i];
            ok(p.x, pattern.width) && (pattern.axial || ok(p.y, pattern.height))
        })
        .collect()
}

/// Histogram bin of a vector's axial orientation; angles within the tie
/// tolerance of a bin edge snap to it.
fn orientation_bin<T: Scalar>(v: Vector2<T>) -> usize {
    let width = T::of(180.0 / ORIENTATION_BINS as f64);
    let a = fold_deg(v.orientation_deg(), T::of(180.0));
    let edge = (a / width).round();
    let k = if (a - edge * width).abs() <= T::tie_tolerance() * T::of(180.0) {
        edge
    } else {
        (a / width).floor()
    };
    k.to_usize().unwrap_or(0) % ORIENTATION_BINS
}

fn normalized<T: Scalar>(counts: [usize; ORIENTATION_BINS]) -> [T; ORIENTATION_BINS] {
    let total = T::of_usize(counts.iter().sum());
    counts.map(|c| T::of_usize(c) / total)
}

/// Normalized histogram over `[0,60), [60,120), [120,180)` of the vectors from
/// each point to its nearest neighbors (ties with the last neighbor included).
/// Interior points are the sources when there are any.
pub fn pair_orientation_histogram<T: Scalar>(pattern: &PointPattern<T>) -> Result<[T; ORIENTATION_BINS]> {
    if pattern.len() < MIN_ORIENTATION_POINTS {
        return Err(Error::InsufficientPoints { need: MIN_ORIENTATION_POINTS, got: pattern.len() });
    }
    let index = NeighborIndex::new(&pattern.points);
    let sources = match median_spacing(pattern, &index) {
        Ok(s) => interior_points(pattern, s),
        Err(_) => Vec::new(),
    };
    let sources = if sources.is_empty() { (0..pattern.len()).collect() } else { sources };
    let mut counts = [0usize; ORIENTATION_BINS];
    for i in sources {
        for (j, _) in index.neighbors(&pattern.points, i, pattern.neighborhood()) {
            counts[orientation_bin(pattern.points[j] - pattern.points[i])] += 1;
        }
    }
    Ok(normalized(counts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    Reflective,
    Translational,
}

fn symmetry_score<T: Scalar>(pattern: &PointPattern<T>, kind: Symmetry, all_if_no_interior: bool) -> Result<T> {
    let need = if pattern.axial { MIN_SYMMETRY_POINTS_1D } else { MIN_SYMMETRY_POINTS };
    if pattern.len() < need {
        return Err(Error::InsufficientPoints { need, got: pattern.len() });
    }
    let pts = &pattern.points;
    let index = NeighborIndex::new(pts);
    let spacing = median_spacing(pattern, &index)?;
    let mut sources = interior_points(pattern, spacing);
    if sources.is_empty() {
        if !all_if_no_interior {
            return Err(Error::NoInteriorPoints);
        }
        sources = (0..pattern.len()).collect();
    }
    let mut sum = T::zero();
    let mut probes = 0usize;
    let mut probe = |p: Point2<T>| {
        if pattern.contains_half_open(p) {
            sum = sum + index.nearest_distance(p);
            probes += 1;
        }
    };
    for i in sources {
        let c = pts[i];
        let hood = index.neighbors(pts, i, pattern.neighborhood());
        for &(j, _) in &hood {
            match kind {
                Symmetry::Reflective => probe(pts[j].reflect_through(c)),
                Symmetry::Translational => {
                    let t = pts[j] - c;
                    for &(k, _) in &hood {
                        probe(pts[k] + t);
                    }
                }
            }
        }
    }
    if probes == 0 {
        return Err(Error::DegeneratePattern("no symmetry probe falls inside the window".into()));
    }
    Ok(sum / T::of_usize(probes) / spacing)
}

/// S(R): mean distance from each reflected neighbor of an interior point to the
/// nearest point of the pattern, in units of the median nearest-neighbor spacing.
pub fn reflective_symmetry<T: Scalar>(pattern: &PointPattern<T>) -> Result<T> {
    symmetry_score(pattern, Symmetry::Reflective, false)
}

/// S(T): as [`reflective_symmetry`] for each neighbor translated by every
/// interior-point-to-neighbor vector of the same neighborhood.
pub fn translational_symmetry<T: Scalar>(pattern: &PointPattern<T>) -> Result<T> {
    symmetry_score(pattern, Symmetry::Translational, false)
}

fn lenient_symmetry<T: Scalar>(pattern: &PointPattern<T>, kind: Symmetry) -> Result<T> {
    match symmetry_score(pattern, kind, true) {
        Err(Error::DegeneratePattern(_)) | Err(Error::InsufficientPoints { .. }) => Ok(T::zero()),
        other => other,
    }
}

/// All layout attributes of a 2D group. Symmetry falls back to every point as
/// a source when no point is interior, and to 0 when it cannot be evaluated.
pub fn layout_attributes<T: Scalar>(pattern: &PointPattern<T>) -> Result<LayoutAttributes<T>> {
    Ok(LayoutAttributes {
        density: density(pattern),
        homogeneity: homogeneity_chi2(pattern)?,
        orientation_hist: pair_orientation_histogram(pattern)?,
        local_symmetry: lenient_symmetry(pattern, Symmetry::Reflective)?,
        translational_symmetry: lenient_symmetry(pattern, Symmetry::Translational)?,
    })
}

/// Layout attributes of a line group on its 1D projection. Pair vectors all run
/// along the projection axis, so the orientation histogram is one-hot there.
pub fn line_layout_attributes<T: Scalar>(lines: &[LineTexel<T>], width: T, height: T) -> Result<LayoutAttributes<T>> {
    let pattern = line_projection(lines, width, height)?;
    let mut hist = [0usize; ORIENTATION_BINS];
    hist[orientation_bin(projection_axis(lines))] = 1;
    Ok(LayoutAttributes {
        density: line_density(lines, width, height)?,
        homogeneity: homogeneity_chi2(&pattern)?,
        orientation_hist: normalized(hist),
        local_symmetry: lenient_symmetry(&pattern, Symmetry::Reflective)?,
        translational_symmetry: lenient_symmetry(&pattern, Symmetry::Translational)?,
    })
}
