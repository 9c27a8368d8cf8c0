use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use texelatt_core::detect::{
    classify_shape, estimate_background, evaluate_detection, evaluate_masks, segment_texels, shape_metrics,
    DetectionScore, IOU_THRESHOLDS,
};
use texelatt_core::synth::{
    generate_texture, render_texel, sample_spec, Coloring, LayoutSpec, PolygonKind, Regularity, TaskConstraints,
    TexelShapeSpec, TextureGroup, TextureSpec,
};
use texelatt_core::{BitMask, ColorRGB, Point, RasterImage, ShapeClass, TexelRecord, Vector};

const WHITE: ColorRGB = ColorRGB::new(255, 255, 255);
const BLACK: ColorRGB = ColorRGB::new(0, 0, 0);
const RED: ColorRGB = ColorRGB::new(220, 20, 60);
const BLUE: ColorRGB = ColorRGB::new(30, 90, 220);

#[test]
fn background_of_dotted_white_image() {
    let mut img = RasterImage::new(10, 10, WHITE).unwrap();
    for i in 0..30 {
        img.set(i % 10, i / 10 * 3, BLACK);
    }
    let bg = estimate_background(&img);
    assert!(bg.r >= 240 && bg.g >= 240 && bg.b >= 240);
}

#[test]
fn background_of_uniform_image() {
    let blue = ColorRGB::new(37, 61, 203);
    let bg = estimate_background(&RasterImage::new(7, 5, blue).unwrap());
    for (a, b) in [(bg.r, blue.r), (bg.g, blue.g), (bg.b, blue.b)] {
        assert!(a.abs_diff(b) <= 4);
    }
}

#[test]
fn background_tie_goes_to_lower_bin() {
    let red = ColorRGB::new(255, 0, 0);
    let blue = ColorRGB::new(0, 0, 255);
    let mut img = RasterImage::new(4, 2, red).unwrap();
    for x in 0..4 {
        img.set(x, 1, blue);
    }
    // 32 levels per channel: red lands in bin 31*32*32, blue in bin 31.
    let bin = |c: ColorRGB| (usize::from(c.r) / 8 * 32 + usize::from(c.g) / 8) * 32 + usize::from(c.b) / 8;
    let expected = if bin(red) < bin(blue) { red } else { blue };
    assert_eq!(estimate_background(&img), expected);
}

fn disk_lattice() -> TextureSpec {
    TextureSpec {
        width: 500,
        height: 500,
        background: WHITE,
        groups: vec![TextureGroup {
            shape: TexelShapeSpec::circle(24.0, RED),
            layout: LayoutSpec {
                basis_u: Vector::new(50.0, 0.0),
                basis_v: Some(Vector::new(0.0, 50.0)),
                jitter_frac: 0.0,
                phase: Point::new(25.0, 25.0),
            },
        }],
        seed: 1,
    }
}

#[test]
fn hundred_disks() {
    let (img, gt) = generate_texture(&disk_lattice()).unwrap();
    let pred = segment_texels(&img);
    assert_eq!(pred.len(), gt.texels.len());
    assert_eq!(pred.len(), 100);
    assert!(pred.iter().all(|t| t.shape_class == ShapeClass::Circle && t.confidence == 1.0));
    assert!(pred.iter().all(|t| t.bbox.contains_point(t.centroid)));
}

#[test]
fn uniform_image_has_no_texels() {
    assert!(segment_texels(&RasterImage::new(64, 64, BLUE).unwrap()).is_empty());
}

#[test]
fn twelve_bands() {
    let spec = TextureSpec {
        width: 480,
        height: 480,
        background: WHITE,
        groups: vec![TextureGroup {
            shape: TexelShapeSpec::line(10.0, 0.0, BLUE),
            layout: LayoutSpec {
                basis_u: Vector::new(0.0, 40.0),
                basis_v: None,
                jitter_frac: 0.0,
                phase: Point::new(0.0, 15.0),
            },
        }],
        seed: 1,
    };
    let (img, gt) = generate_texture(&spec).unwrap();
    assert_eq!(gt.texels.len(), 12);
    let pred = segment_texels(&img);
    assert_eq!(pred.len(), 12);
    assert!(pred.iter().all(|t| t.shape_class == ShapeClass::Line));
}

/// Perimeter of the convex hull of the pixel squares by gift wrapping,
/// independent of the library's monotone chain.
fn gift_wrap_perimeter(mask: &BitMask) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (x, y) in mask.iter() {
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            pts.push((f64::from(x + dx), f64::from(y + dy)));
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let start = pts[0];
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut next = if pts[0] == cur { pts[1] } else { pts[0] };
        for &p in &pts {
            let cross = (next.0 - cur.0) * (p.1 - cur.1) - (next.1 - cur.1) * (p.0 - cur.0);
            let farther = (p.0 - cur.0).hypot(p.1 - cur.1) > (next.0 - cur.0).hypot(next.1 - cur.1);
            if cross < 0.0 || (cross == 0.0 && farther) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        cur = next;
    }
    (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            (a.0 - b.0).hypot(a.1 - b.1)
        })
        .sum()
}

fn rendered(shape: &TexelShapeSpec, center: Point) -> BitMask {
    let mut img = RasterImage::new(200, 200, WHITE).unwrap();
    render_texel(&mut img, shape, center).unwrap()
}

#[test]
fn disk_is_a_circle() {
    let m = rendered(&TexelShapeSpec::circle(30.0, RED), Point::new(100.0, 100.0));
    let p = gift_wrap_perimeter(&m);
    let circularity = 4.0 * std::f64::consts::PI * m.count() as f64 / (p * p);
    assert!(circularity >= 0.85 && circularity <= 1.05, "{circularity}");
    assert!((shape_metrics(&m).unwrap().circularity - circularity).abs() < 1e-9);
    assert_eq!(classify_shape(&m).unwrap(), ShapeClass::Circle);
}

#[test]
fn long_bar_is_a_line() {
    let m = BitMask::from_runs(300, 300, (100..104).map(|y| (y, 50, 200))).unwrap();
    let expected = ((200.0f64.powi(2) - 1.0) / (4.0f64.powi(2) - 1.0)).sqrt();
    assert!((shape_metrics(&m).unwrap().elongation - expected).abs() < 1e-9);
    assert_eq!(classify_shape(&m).unwrap(), ShapeClass::Line);
}

#[test]
fn axis_aligned_square_is_a_polygon() {
    let m = BitMask::from_runs(100, 100, (30..50).map(|y| (y, 30, 20))).unwrap();
    let c = shape_metrics(&m).unwrap().circularity;
    assert!((c - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert_eq!(classify_shape(&m).unwrap(), ShapeClass::Polygon);
}

#[test]
fn empty_mask_cannot_be_classified() {
    assert!(classify_shape(&BitMask::new(10, 10)).is_err());
}

fn records(masks: &[BitMask]) -> Vec<TexelRecord> {
    masks.iter().map(|m| TexelRecord::from_mask(m.clone(), ShapeClass::Circle, 1.0).unwrap()).collect()
}

#[test]
fn perfect_prediction() {
    let (_, gt) = generate_texture(&disk_lattice()).unwrap();
    let score = evaluate_detection(&gt.records(), &gt, &IOU_THRESHOLDS);
    assert_eq!(score, DetectionScore { ap: 1.0, ap50: 1.0, ap75: 1.0, tp: 100, fp: 0, fn_: 0 });
}

#[test]
fn empty_prediction() {
    let (_, gt) = generate_texture(&disk_lattice()).unwrap();
    let score = evaluate_detection(&[], &gt, &IOU_THRESHOLDS);
    assert_eq!((score.ap, score.ap50, score.tp, score.fn_), (0.0, 0.0, 0, 100));
}

#[test]
fn half_of_the_truth() {
    let (_, gt) = generate_texture(&disk_lattice()).unwrap();
    let pred: Vec<TexelRecord> = gt.records().into_iter().take(50).collect();
    // One operating point: precision 50/50, recall 50/100, so AP = 1.0 * 0.5.
    let score = evaluate_detection(&pred, &gt, &IOU_THRESHOLDS);
    assert_eq!(score.ap50, 0.5);
    assert_eq!((score.tp, score.fp, score.fn_), (50, 0, 50));
}

#[test]
fn precision_recall_with_confidence_levels() {
    let masks: Vec<BitMask> = (0..4).map(|i| BitMask::from_runs(40, 40, [(i * 5, 0, 4)]).unwrap()).collect();
    let gt: Vec<&BitMask> = masks.iter().collect();
    let mut pred = records(&masks[..2]);
    pred.push(TexelRecord::from_mask(BitMask::from_runs(40, 40, [(30, 0, 4)]).unwrap(), ShapeClass::Line, 0.5).unwrap());
    pred.push(TexelRecord::from_mask(masks[2].clone(), ShapeClass::Line, 0.2).unwrap());
    // Levels 1.0: tp 2 (P 1, R .5); 0.5: tp 2 fp 1 (P 2/3, R .5); 0.2: tp 3 fp 1 (P 3/4, R .75).
    // Interpolated: .5 * 1 + .25 * .75
    let s = evaluate_masks(&pred, &gt, &[0.5]);
    assert!((s.ap50 - (0.5 + 0.25 * 0.75)).abs() < 1e-12);
    assert_eq!((s.tp, s.fp, s.fn_), (3, 1, 1));
}

#[test]
fn empty_truth() {
    assert_eq!(evaluate_masks(&[], &[], &IOU_THRESHOLDS).ap, 1.0);
    let m = BitMask::from_runs(10, 10, [(0, 0, 3)]).unwrap();
    assert_eq!(evaluate_masks(&records(&[m]), &[], &IOU_THRESHOLDS).ap, 0.0);
}

fn regular_constraints(size: u32) -> TaskConstraints {
    TaskConstraints {
        regularity: Some(Regularity::Regular),
        coloring: Some(Coloring::Mono),
        non_overlapping: true,
        image_size: size,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn regular_textures_are_recovered_exactly(seed in any::<u64>()) {
        let spec = sample_spec(&mut ChaCha8Rng::seed_from_u64(seed), &regular_constraints(320)).unwrap();
        let (img, gt) = generate_texture(&spec).unwrap();
        let pred = segment_texels(&img);
        // Slivers below the minimum component size cannot be detected.
        let visible = gt.texels.iter().filter(|t| t.area_px >= 9).count();
        prop_assert_eq!(pred.len(), visible);
        let masks: Vec<&BitMask> = gt.texels.iter().filter(|t| t.area_px >= 9).map(|t| &t.mask).collect();
        prop_assert_eq!(evaluate_masks(&pred, &masks, &[0.5]).ap50, 1.0);
    }

    #[test]
    fn classification_is_rotation_tolerant(orientation in 0.0f64..180.0, size in 20.0f64..60.0, kind in 0usize..4, dx in 0.0f64..1.0, dy in 0.0f64..1.0) {
        let (shape, expected) = match kind {
            0 => (TexelShapeSpec::circle(size, RED), ShapeClass::Circle),
            1 => (TexelShapeSpec::polygon(PolygonKind::Square, size, orientation, RED), ShapeClass::Polygon),
            2 => (TexelShapeSpec::polygon(PolygonKind::Triangle, size, orientation, RED), ShapeClass::Polygon),
            _ => (TexelShapeSpec::polygon(PolygonKind::Rectangle, size, orientation, RED), ShapeClass::Polygon),
        };
        let m = rendered(&shape, Point::new(100.0 + dx, 100.0 + dy));
        prop_assert_eq!(classify_shape(&m).unwrap(), expected);
    }

    #[test]
    fn detection_count_ignores_background(seed in any::<u64>(), bg_seed in any::<u64>()) {
        let spec = sample_spec(&mut ChaCha8Rng::seed_from_u64(seed), &regular_constraints(256)).unwrap();
        let other = sample_spec(&mut ChaCha8Rng::seed_from_u64(bg_seed), &regular_constraints(256)).unwrap();
        let mut recolored = spec.clone();
        recolored.background = other.background;
        recolored.groups[0].shape.color = other.groups[0].shape.color;
        let count = |s: &TextureSpec| segment_texels(&generate_texture(s).unwrap().0).len();
        prop_assert_eq!(count(&spec), count(&recolored));
    }
}
