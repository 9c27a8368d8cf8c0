use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use texelatt_core::layout_stats::{
    density, homogeneity_chi2, layout_attributes, line_density, line_layout_attributes, line_projection,
    pair_orientation_histogram, reflective_symmetry, translational_symmetry, PointPattern,
};
use texelatt_core::synth::{jitter_grid, LayoutSpec};
use texelatt_core::{Error, Point, Point2, Vector};

fn pattern(points: &[(f64, f64)], w: f64, h: f64) -> PointPattern<f64> {
    PointPattern::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect(), w, h).unwrap()
}

fn square_grid(spacing: f64, n: usize) -> PointPattern<f64> {
    let pts: Vec<(f64, f64)> = (0..n * n)
        .map(|i| ((i % n) as f64 * spacing + spacing / 2.0, (i / n) as f64 * spacing + spacing / 2.0))
        .collect();
    pattern(&pts, spacing * n as f64, spacing * n as f64)
}

fn hex_grid(spacing: f64, w: f64, h: f64) -> PointPattern<f64> {
    let row = spacing * 3f64.sqrt() / 2.0;
    let mut pts = Vec::new();
    for j in 0..((h / row) as i64 + 2) {
        for i in -((w / spacing) as i64) - 2..(w / spacing) as i64 + 2 {
            let x = 3.0 + i as f64 * spacing + j as f64 * spacing / 2.0;
            let y = 3.0 + j as f64 * row;
            if x >= 0.0 && x < w && y < h {
                pts.push((x, y));
            }
        }
    }
    pattern(&pts, w, h)
}

fn jittered(jitter: f64, seed: u64) -> PointPattern<f64> {
    let layout = LayoutSpec {
        basis_u: Vector::new(20.0, 0.0),
        basis_v: Some(Vector::new(0.0, 20.0)),
        jitter_frac: jitter,
        phase: Point::new(10.0, 10.0),
    };
    let pts = jitter_grid(&layout, 400, 400, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    PointPattern::new(pts, 400.0, 400.0).unwrap()
}

#[test]
fn density_examples() {
    let pts: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 10.0, 500.0)).collect();
    assert_eq!(density(&pattern(&pts, 1000.0, 1000.0)), 1e-4);
    assert_eq!(density(&pattern(&[(5.0, 5.0)], 10.0, 10.0)), 0.01);
    assert!(PointPattern::new(vec![Point::new(0.0, 0.0)], 0.0, 10.0).is_err());
    assert!(PointPattern::<f64>::new(vec![], 10.0, 10.0).is_err());
    assert!(PointPattern::new(vec![Point::new(11.0, 0.0)], 10.0, 10.0).is_err());
}

fn bands(n: usize, orientation: f64, axis: fn(f64) -> Point) -> Vec<(f64, Point)> {
    (0..n).map(|i| (orientation, axis(25.0 + 50.0 * i as f64))).collect()
}

#[test]
fn line_density_examples() {
    let horizontal = bands(10, 0.0, |s| Point::new(250.0, s));
    assert!((line_density(&horizontal, 500.0, 500.0).unwrap() - 0.02).abs() < 1e-12);
    assert!((line_density(&horizontal[..1], 500.0, 500.0).unwrap() - 1.0 / 500.0).abs() < 1e-12);
    let vertical = bands(7, 90.0, |s| Point::new(s, 250.0));
    assert!((line_density(&vertical, 500.0, 300.0).unwrap() - 7.0 / 500.0).abs() < 1e-12);
    // A 45 degree axis crosses a w×h window over (w + h)/√2.
    let diagonal = bands(4, 45.0, |s| Point::new(s, s));
    assert!((line_density(&diagonal, 300.0, 100.0).unwrap() - 4.0 / (400.0 / 2f64.sqrt())).abs() < 1e-9);
}

#[test]
fn line_projection_positions() {
    let lines = bands(10, 0.0, |s| Point::new(100.0, s));
    let p = line_projection(&lines, 500.0, 500.0).unwrap();
    assert!(p.is_axial());
    let mut xs: Vec<f64> = p.points().iter().map(|q| q.x).collect();
    xs.sort_by(f64::total_cmp);
    let mut expected: Vec<f64> = (0..10).map(|i| 25.0 + 50.0 * i as f64).collect();
    if (xs[0] - expected[0]).abs() > 1e-9 {
        expected = expected.iter().map(|v| 500.0 - v).rev().collect();
    }
    for (a, b) in xs.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(matches!(line_projection(&lines[..1], 500.0, 500.0), Err(Error::InsufficientPoints { .. })));
}

#[test]
fn homogeneity_examples() {
    let one_each: Vec<(f64, f64)> = (0..100).map(|i| ((i % 10) as f64 * 10.0 + 5.0, (i / 10) as f64 * 10.0 + 5.0)).collect();
    assert_eq!(homogeneity_chi2(&pattern(&one_each, 100.0, 100.0)).unwrap(), 0.0);
    let clumped: Vec<(f64, f64)> = (0..100).map(|i| (1.0 + i as f64 * 0.05, 2.0)).collect();
    assert_eq!(homogeneity_chi2(&pattern(&clumped, 100.0, 100.0)).unwrap(), 9900.0);
    assert!(matches!(
        homogeneity_chi2(&pattern(&one_each[..9], 100.0, 100.0)),
        Err(Error::InsufficientPoints { need: 10, got: 9 })
    ));
}

#[test]
fn homogeneity_on_one_dimension() {
    let p = PointPattern::axial((0..20).map(|i| i as f64 * 25.0 + 1.0).collect(), 500.0).unwrap();
    assert_eq!(homogeneity_chi2(&p).unwrap(), 0.0);
    let p = PointPattern::axial((0..10).map(|i| i as f64).collect(), 500.0).unwrap();
    // All 10 in the first bin, E = 1: 81 + 9.
    assert_eq!(homogeneity_chi2(&p).unwrap(), 90.0);
}

/// Quadrat statistic recounted by interval membership.
fn chi2_oracle(points: &[(f64, f64)], w: f64, h: f64) -> f64 {
    let e = points.len() as f64 / 100.0;
    let mut total = 0.0;
    for qy in 0..10 {
        for qx in 0..10 {
            let (x0, x1) = (w * qx as f64 / 10.0, w * (qx + 1) as f64 / 10.0);
            let (y0, y1) = (h * qy as f64 / 10.0, h * (qy + 1) as f64 / 10.0);
            let o = points.iter().filter(|&&(x, y)| x >= x0 && x < x1 && y >= y0 && y < y1).count() as f64;
            total += (o - e) * (o - e) / e;
        }
    }
    total
}

#[test]
fn homogeneity_matches_recount_on_random_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (w, h) = (rng.random_range(50.0..2000.0), rng.random_range(50.0..2000.0));
        let n = rng.random_range(10..400);
        let cluster = rng.random_range(0.05..1.0);
        let pts: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random_range(0.0..w * cluster), rng.random_range(0.0..h))).collect();
        assert_eq!(homogeneity_chi2(&pattern(&pts, w, h)).unwrap(), chi2_oracle(&pts, w, h));
    }
}

#[test]
fn orientation_histogram_examples() {
    assert_eq!(pair_orientation_histogram(&square_grid(10.0, 8)).unwrap(), [0.5, 0.5, 0.0]);
    let row: Vec<(f64, f64)> = (0..12).map(|i| (5.0 + 10.0 * i as f64, 50.0)).collect();
    assert_eq!(pair_orientation_histogram(&pattern(&row, 120.0, 100.0)).unwrap(), [1.0, 0.0, 0.0]);
    let hex = pair_orientation_histogram(&hex_grid(10.0, 100.0, 100.0)).unwrap();
    for v in hex {
        assert!((v - 1.0 / 3.0).abs() < 1e-12, "{hex:?}");
    }
    assert!(pair_orientation_histogram(&pattern(&row[..4], 120.0, 100.0)).is_err());
}

fn oracle_knn(pts: &[Point2<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..pts.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| pts[i].distance(pts[a]).total_cmp(&pts[i].distance(pts[b])));
    others.truncate(k);
    others
}

fn oracle_spacing(pts: &[Point2<f64>]) -> f64 {
    let mut d: Vec<f64> = (0..pts.len()).map(|i| pts[oracle_knn(pts, i, 1)[0]].distance(pts[i])).collect();
    d.sort_by(f64::total_cmp);
    let m = d.len() / 2;
    if d.len() % 2 == 0 {
        (d[m - 1] + d[m]) / 2.0
    } else {
        d[m]
    }
}

fn oracle_nearest(pts: &[Point2<f64>], q: Point2<f64>) -> f64 {
    pts.iter().map(|p| p.distance(q)).fold(f64::INFINITY, f64::min)
}

/// Brute-force S(R) and S(T) for 2D patterns.
fn oracle_symmetry(p: &PointPattern<f64>) -> (f64, f64) {
    let pts = p.points();
    let (w, h) = p.window();
    let s = oracle_spacing(pts);
    let m = 1.5 * s;
    let inside = |q: Point2<f64>| q.x >= 0.0 && q.x < w && q.y >= 0.0 && q.y < h;
    let (mut r_sum, mut r_n, mut t_sum, mut t_n) = (0.0, 0, 0.0, 0);
    for i in 0..pts.len() {
        let c = pts[i];
        if c.x < m || c.x > w - m || c.y < m || c.y > h - m {
            continue;
        }
        let hood = oracle_knn(pts, i, 4);
        for &j in &hood {
            let r = Point2::new(2.0 * c.x - pts[j].x, 2.0 * c.y - pts[j].y);
            if inside(r) {
                r_sum += oracle_nearest(pts, r);
                r_n += 1;
            }
            for &k in &hood {
                let q = Point2::new(pts[k].x + pts[j].x - c.x, pts[k].y + pts[j].y - c.y);
                if inside(q) {
                    t_sum += oracle_nearest(pts, q);
                    t_n += 1;
                }
            }
        }
    }
    (r_sum / r_n as f64 / s, t_sum / t_n as f64 / s)
}

#[test]
fn symmetry_is_zero_on_lattices() {
    for p in [square_grid(10.0, 12), hex_grid(10.0, 150.0, 130.0), hex_grid(7.5, 90.0, 200.0)] {
        assert!(reflective_symmetry(&p).unwrap().abs() <= 1e-9);
        assert!(translational_symmetry(&p).unwrap().abs() <= 1e-9);
    }
    assert!(translational_symmetry(&jittered(0.0, 3)).unwrap().abs() <= 1e-9);
}

#[test]
fn symmetry_needs_interior_points() {
    let pts: Vec<(f64, f64)> = (0..9).map(|i| ((i % 3) as f64 * 10.0 + 1.0, (i / 3) as f64 * 10.0 + 1.0)).collect();
    assert!(matches!(reflective_symmetry(&pattern(&pts, 30.0, 30.0)), Err(Error::NoInteriorPoints)));
    assert!(matches!(
        translational_symmetry(&pattern(&pts[..8], 300.0, 300.0)),
        Err(Error::InsufficientPoints { .. })
    ));
    // Without interior points the layout attributes still evaluate every point.
    let grid: Vec<(f64, f64)> = (0..16).map(|i| ((i % 4) as f64 * 10.0 + 1.0, (i / 4) as f64 * 10.0 + 1.0)).collect();
    let attrs = layout_attributes(&pattern(&grid, 40.0, 40.0)).unwrap();
    assert!(attrs.local_symmetry.is_finite() && attrs.translational_symmetry.is_finite());
}

#[test]
fn scaling_leaves_symmetry_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<(f64, f64)> = (0..9)
        .map(|i| (40.0 + (i % 3) as f64 * 10.0 + rng.random_range(-2.0..2.0), 40.0 + (i / 3) as f64 * 10.0 + rng.random_range(-2.0..2.0)))
        .collect();
    let doubled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (2.0 * x, 2.0 * y)).collect();
    let a = pattern(&pts, 100.0, 100.0);
    let b = pattern(&doubled, 200.0, 200.0);
    assert_eq!(translational_symmetry(&a).unwrap(), translational_symmetry(&b).unwrap());
    assert_eq!(reflective_symmetry(&a).unwrap(), reflective_symmetry(&b).unwrap());
}

fn mean_over_seeds(jitter: f64, f: fn(&PointPattern<f64>) -> texelatt_core::Result<f64>) -> f64 {
    (0..20).map(|seed| f(&jittered(jitter, seed)).unwrap()).sum::<f64>() / 20.0
}

#[test]
fn reflective_symmetry_grows_with_jitter() {
    assert!(mean_over_seeds(0.3, reflective_symmetry) > mean_over_seeds(0.1, reflective_symmetry));
}

#[test]
fn translational_symmetry_grows_with_jitter() {
    let means: Vec<f64> = [0.0, 0.1, 0.2, 0.4].iter().map(|&j| mean_over_seeds(j, translational_symmetry)).collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn one_dimensional_translational_symmetry() {
    let even = PointPattern::axial((0..10).map(|i| i as f64 * 50.0).collect(), 500.0).unwrap();
    assert_eq!(translational_symmetry(&even).unwrap(), 0.0);
    let broken = PointPattern::axial(vec![0.0, 50.0, 100.0, 150.0, 270.0], 300.0).unwrap();
    assert!(translational_symmetry(&broken).unwrap() > 0.0);
}

#[test]
fn evenly_spaced_bands() {
    let lines: Vec<(f64, Point)> = (0..10).map(|i| (90.0, Point::new(25.0 + 50.0 * i as f64, 100.0))).collect();
    let a = line_layout_attributes(&lines, 500.0, 500.0).unwrap();
    assert!((a.density - 0.02).abs() < 1e-12);
    assert!(a.homogeneity.abs() < 1e-9);
    assert_eq!(a.orientation_hist, [1.0, 0.0, 0.0]);
    assert!(a.local_symmetry.abs() < 1e-9 && a.translational_symmetry.abs() < 1e-9);
    let horizontal: Vec<(f64, Point)> = (0..10).map(|i| (0.0, Point::new(100.0, 25.0 + 50.0 * i as f64))).collect();
    assert_eq!(line_layout_attributes(&horizontal, 500.0, 500.0).unwrap().orientation_hist, [0.0, 1.0, 0.0]);
}

#[test]
fn single_precision_agrees() {
    let p = jittered(0.2, 9);
    let q = PointPattern::new(p.points().iter().map(|v| v.cast::<f32>()).collect(), 400.0f32, 400.0).unwrap();
    let (a, b) = (layout_attributes(&p).unwrap(), layout_attributes(&q).unwrap());
    assert!((f64::from(b.translational_symmetry) - a.translational_symmetry).abs() < 1e-3);
    assert!((f64::from(b.local_symmetry) - a.local_symmetry).abs() < 1e-3);
    assert!((f64::from(b.homogeneity) - a.homogeneity).abs() < 1e-3);
}

fn random_pattern() -> impl Strategy<Value = (Vec<(f64, f64)>, f64, f64)> {
    (100.0f64..800.0, 100.0f64..800.0).prop_flat_map(|(w, h)| {
        (prop::collection::vec((0.0..w, 0.0..h), 10..120), Just(w), Just(h))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetry_matches_brute_force((pts, w, h) in random_pattern()) {
        let p = pattern(&pts, w, h);
        let (r, t) = oracle_symmetry(&p);
        match (reflective_symmetry(&p), translational_symmetry(&p)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a - r).abs() <= 1e-9 * r.max(1.0));
                prop_assert!((b - t).abs() <= 1e-9 * t.max(1.0));
            }
            (Err(Error::NoInteriorPoints), Err(Error::NoInteriorPoints)) => prop_assert!(r.is_nan()),
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn statistics_ignore_point_order((pts, w, h) in random_pattern(), seed in any::<u64>()) {
        let mut shuffled = pts.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let (a, b) = (pattern(&pts, w, h), pattern(&shuffled, w, h));
        prop_assert_eq!(homogeneity_chi2(&a).unwrap(), homogeneity_chi2(&b).unwrap());
        let (ha, hb) = (pair_orientation_histogram(&a).unwrap(), pair_orientation_histogram(&b).unwrap());
        prop_assert!((ha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (x, y) in ha.iter().zip(&hb) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_turn_leaves_symmetry_unchanged(jitter in 0.0f64..0.45, seed in any::<u64>()) {
        let p = jittered(jitter, seed);
        let turned = PointPattern::new(p.points().iter().map(|q| Point::new(q.y, 400.0 - q.x)).filter(|q| q.y < 400.0).collect(), 400.0, 400.0).unwrap();
        prop_assume!(turned.len() == p.len());
        let a = translational_symmetry(&p).unwrap();
        let b = translational_symmetry(&turned).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{} {}", a, b);
    }

    #[test]
    fn lattice_scores_vanish(spacing in 6.0f64..30.0, angle in 0.0f64..180.0, skew in 60.0f64..120.0) {
        let u = Vector::from_orientation_deg(angle) * spacing;
        let v = Vector::from_orientation_deg(angle + skew) * spacing;
        let layout = LayoutSpec { basis_u: u, basis_v: Some(v), jitter_frac: 0.0, phase: Point::new(3.0, 5.0) };
        let pts = jitter_grid(&layout, 300, 300, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let p = PointPattern::new(pts, 300.0, 300.0).unwrap();
        prop_assert!(reflective_symmetry(&p).unwrap() <= 1e-9);
        prop_assert!(translational_symmetry(&p).unwrap() <= 1e-9);
    }
}
