use proptest::prelude::*;
use texelatt_core::{decode_png, encode_png, load_png, mask_to_bbox, save_png, BitMask, ColorRGB, Error, MaskRle, RasterImage};

#[test]
fn two_by_two_round_trip() {
    let px = vec![
        ColorRGB::new(0, 0, 0),
        ColorRGB::new(255, 255, 255),
        ColorRGB::new(255, 0, 0),
        ColorRGB::new(0, 0, 255),
    ];
    let img = RasterImage::from_pixels(2, 2, px).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.png");
    save_png(&img, &path).unwrap();
    assert_eq!(load_png(&path).unwrap(), img);
}

#[test]
fn one_white_pixel() {
    let img = RasterImage::new(1, 1, ColorRGB::new(255, 255, 255)).unwrap();
    let back = decode_png(&encode_png(&img).unwrap()).unwrap();
    assert_eq!((back.width(), back.height()), (1, 1));
    assert_eq!(back.get(0, 0), ColorRGB::new(255, 255, 255));
}

fn encode_raw(width: u32, height: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(depth);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(data).unwrap();
    }
    out
}

#[test]
fn sixteen_bit_is_rejected() {
    let bytes = encode_raw(1, 1, png::ColorType::Rgb, png::BitDepth::Sixteen, &[0; 6]);
    let err = decode_png(&bytes).unwrap_err();
    assert!(matches!(err, Error::UnsupportedBitDepth(_)));
    assert!(err.to_string().contains("unsupported bit depth"));
}

#[test]
fn alpha_is_dropped() {
    let bytes = encode_raw(2, 1, png::ColorType::Rgba, png::BitDepth::Eight, &[10, 20, 30, 0, 40, 50, 60, 255]);
    let img = decode_png(&bytes).unwrap();
    assert_eq!(img.pixels(), &[ColorRGB::new(10, 20, 30), ColorRGB::new(40, 50, 60)]);
}

#[test]
fn missing_file_is_an_error() {
    assert!(matches!(load_png("/nonexistent/x.png"), Err(Error::Io { .. })));
}

fn image_strategy() -> impl Strategy<Value = RasterImage> {
    (1u32..12, 1u32..12).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<(u8, u8, u8)>(), (w * h) as usize).prop_map(move |px| {
            RasterImage::from_pixels(w, h, px.into_iter().map(|(r, g, b)| ColorRGB::new(r, g, b)).collect()).unwrap()
        })
    })
}

fn mask_strategy() -> impl Strategy<Value = (u32, u32, Vec<(u32, u32)>)> {
    (1u32..20, 1u32..20).prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec((0..w, 0..h), 0..60)))
}

proptest! {
    #[test]
    fn png_round_trip_is_exact(img in image_strategy()) {
        prop_assert_eq!(decode_png(&encode_png(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn bbox_is_tight((w, h, px) in mask_strategy()) {
        let m = BitMask::from_pixels(w, h, px.clone()).unwrap();
        match mask_to_bbox(&m) {
            Err(_) => prop_assert!(px.is_empty()),
            Ok(b) => {
                prop_assert!(px.iter().all(|&(x, y)| b.contains(x, y)));
                prop_assert!(px.iter().any(|&(x, _)| x == b.x_min) && px.iter().any(|&(x, _)| x == b.x_max));
                prop_assert!(px.iter().any(|&(_, y)| y == b.y_min) && px.iter().any(|&(_, y)| y == b.y_max));
            }
        }
    }

    #[test]
    fn mask_rle_round_trip((w, h, px) in mask_strategy()) {
        let m = BitMask::from_pixels(w, h, px.clone()).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: BitMask = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &m);
        let rle = MaskRle::from(&m);
        prop_assert_eq!(rle.counts.iter().sum::<u64>(), u64::from(w * h));
        let mut sorted = px.clone();
        sorted.sort_by_key(|&(x, y)| (y, x));
        sorted.dedup();
        prop_assert_eq!(m.iter().collect::<Vec<_>>(), sorted);
    }

    #[test]
    fn incremental_set_matches_bulk((w, h, px) in mask_strategy()) {
        let mut m = BitMask::new(w, h);
        for &(x, y) in &px {
            m.set(x, y);
        }
        prop_assert_eq!(m, BitMask::from_pixels(w, h, px).unwrap());
    }

    #[test]
    fn intersection_matches_pixel_count((w, h, a) in mask_strategy(), b in prop::collection::vec((0u32..20, 0u32..20), 0..60)) {
        let ma = BitMask::from_pixels(w, h, a).unwrap();
        let mb = BitMask::from_pixels(w, h, b.into_iter().filter(|&(x, y)| x < w && y < h)).unwrap();
        let brute = ma.iter().filter(|&(x, y)| mb.get(x, y)).count() as u64;
        prop_assert_eq!(ma.intersection_count(&mb), brute);
    }
}
