use crate::color::ColorRGB;
use crate::raster::RasterImage;

const LEVELS: usize = 32;

fn bin(c: ColorRGB) -> usize {
    let q = |v: u8| usize::from(v >> 3);
    (q(c.r) * LEVELS + q(c.g)) * LEVELS + q(c.b)
}

/// Modal color over a 32-level-per-channel quantization, returned as the
/// rounded mean of the pixels falling in the modal bin. Ties go to the lower bin.
pub fn estimate_background(image: &RasterImage) -> ColorRGB {
    let mut counts = vec![0u32; LEVELS * LEVELS * LEVELS];
    for &c in image.pixels() {
        counts[bin(c)] += 1;
    }
    let mut modal = 0;
    for (i, &n) in counts.iter().enumerate() {
        if n > counts[modal] {
            modal = i;
        }
    }
    let mut sum = [0u64; 3];
    for &c in image.pixels().iter().filter(|&&c| bin(c) == modal) {
        sum[0] += u64::from(c.r);
        sum[1] += u64::from(c.g);
        sum[2] += u64::from(c.b);
    }
    let n = u64::from(counts[modal]);
    let avg = |s: u64| ((s as f64 / n as f64).round()) as u8;
    ColorRGB::new(avg(sum[0]), avg(sum[1]), avg(sum[2]))
}
