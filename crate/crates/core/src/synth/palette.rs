use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::color::ColorRGB;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonyRule {
    /// All hues within a 40 degree window.
    Analogous,
    /// Two hue families 180 ± 15 degrees apart.
    Complementary,
}

const STRICT_ATTEMPTS: usize = 100;
const RELAXED_ATTEMPTS: usize = 10_000;

/// `k` colors following a harmony rule drawn from `rng`.
pub fn harmonized_palette<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Result<Vec<ColorRGB>> {
    let rule = if rng.random_bool(0.5) { HarmonyRule::Analogous } else { HarmonyRule::Complementary };
    harmonized_palette_with_rule(rng, k, rule)
}

/// `k` colors following `rule`, carrying at least two distinct color names.
///
/// Saturation and value are drawn from `[0.4, 0.95]`; after a bounded number
/// of failed attempts the saturation range is widened to `[0.05, 1]`.
pub fn harmonized_palette_with_rule<R: Rng + ?Sized>(rng: &mut R, k: usize, rule: HarmonyRule) -> Result<Vec<ColorRGB>> {
    if !(2..=4).contains(&k) {
        return Err(Error::InvalidSpec(format!("palette size {k} outside [2, 4]")));
    }
    for attempt in 0..STRICT_ATTEMPTS + RELAXED_ATTEMPTS {
        let sat = if attempt < STRICT_ATTEMPTS { 0.4..=0.95 } else { 0.05..=1.0 };
        let palette = draw(rng, k, rule, sat);
        let names: HashSet<_> = palette.iter().map(|c| c.name()).collect();
        if names.len() >= 2 {
            return Ok(palette);
        }
    }
    // Unreachable in practice: a dark and a light color of one hue always differ in name.
    let hue = rng.random_range(0.0..360.0);
    Ok((0..k).map(|i| ColorRGB::from_hsv(hue, 0.9, if i % 2 == 0 { 0.95 } else { 0.1 })).collect())
}

fn draw<R: Rng + ?Sized>(rng: &mut R, k: usize, rule: HarmonyRule, sat: std::ops::RangeInclusive<f64>) -> Vec<ColorRGB> {
    let base: f64 = rng.random_range(0.0..360.0);
    // Margins below the rule bounds absorb 8-bit quantization of the hue.
    let second = base + 180.0 + rng.random_range(-14.0..=14.0);
    (0..k)
        .map(|i| {
            let hue = match rule {
                HarmonyRule::Analogous => base + rng.random_range(0.0..=38.0),
                HarmonyRule::Complementary if i % 2 == 0 => base,
                HarmonyRule::Complementary => second,
            };
            let s = rng.random_range(sat.clone());
            let v = rng.random_range(0.4..=0.95);
            ColorRGB::from_hsv(hue.rem_euclid(360.0), s, v)
        })
        .collect()
}
