//! RGB colors, the 11-name color vocabulary and its CIELAB nearest-prototype naming.

use std::fmt;
use std::str::FromStr;

use palette::white_point::D65;
use palette::{FromColor, Hsv, IntoColor, Lab, Srgb};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColorRGB {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl ColorRGB {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Euclidean distance in RGB space.
    pub fn distance(self, other: Self) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(self, other: Self) -> f64 {
        let dr = f64::from(self.r) - f64::from(other.r);
        let dg = f64::from(self.g) - f64::from(other.g);
        let db = f64::from(self.b) - f64::from(other.b);
        dr * dr + dg * dg + db * db
    }

    /// CIELAB (D65) coordinates `[L, a, b]`.
    pub fn to_lab(self) -> [f64; 3] {
        let srgb: Srgb<f64> = Srgb::new(self.r, self.g, self.b).into_format();
        let lab: Lab<D65, f64> = Lab::from_color(srgb);
        [lab.l, lab.a, lab.b]
    }

    /// Color from hue in degrees and saturation/value in `[0, 1]`.
    pub fn from_hsv(hue_deg: f64, saturation: f64, value: f64) -> Self {
        let hsv = Hsv::new(hue_deg as f32, saturation as f32, value as f32);
        let rgb: Srgb<f32> = hsv.into_color();
        let rgb: Srgb<u8> = rgb.into_format();
        Self::new(rgb.red, rgb.green, rgb.blue)
    }

    /// `(hue_deg, saturation, value)`.
    pub fn to_hsv(self) -> (f64, f64, f64) {
        let rgb: Srgb<f32> = Srgb::new(self.r, self.g, self.b).into_format();
        let hsv: Hsv = Hsv::from_color(rgb);
        let hue = f64::from(hsv.hue.into_positive_degrees());
        (hue, f64::from(hsv.saturation), f64::from(hsv.value))
    }

    pub fn name(self) -> ColorName {
        color_name(self)
    }
}

impl fmt::Display for ColorRGB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorName {
    Black,
    White,
    Grey,
    Red,
    Orange,
    Yellow,
    Green,
    Blue,
    Purple,
    Pink,
    Brown,
}

impl ColorName {
    /// All names in prototype order; this is also the order of the descriptor's color histograms.
    pub const ALL: [ColorName; 11] = [
        ColorName::Black,
        ColorName::White,
        ColorName::Grey,
        ColorName::Red,
        ColorName::Orange,
        ColorName::Yellow,
        ColorName::Green,
        ColorName::Blue,
        ColorName::Purple,
        ColorName::Pink,
        ColorName::Brown,
    ];

    pub fn prototype(self) -> ColorRGB {
        match self {
            ColorName::Black => ColorRGB::new(0, 0, 0),
            ColorName::White => ColorRGB::new(255, 255, 255),
            ColorName::Grey => ColorRGB::new(128, 128, 128),
            ColorName::Red => ColorRGB::new(220, 20, 60),
            ColorName::Orange => ColorRGB::new(255, 140, 0),
            ColorName::Yellow => ColorRGB::new(255, 215, 0),
            ColorName::Green => ColorRGB::new(34, 139, 34),
            ColorName::Blue => ColorRGB::new(30, 90, 220),
            ColorName::Purple => ColorRGB::new(130, 30, 180),
            ColorName::Pink => ColorRGB::new(255, 150, 190),
            ColorName::Brown => ColorRGB::new(120, 70, 20),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColorName::Black => "black",
            ColorName::White => "white",
            ColorName::Grey => "grey",
            ColorName::Red => "red",
            ColorName::Orange => "orange",
            ColorName::Yellow => "yellow",
            ColorName::Green => "green",
            ColorName::Blue => "blue",
            ColorName::Purple => "purple",
            ColorName::Pink => "pink",
            ColorName::Brown => "brown",
        }
    }
}

impl fmt::Display for ColorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ColorName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown color name `{s}`")))
    }
}

/// Nearest prototype in CIELAB; ties go to the earlier name in [`ColorName::ALL`].
pub fn color_name(rgb: ColorRGB) -> ColorName {
    let lab = rgb.to_lab();
    let mut best = ColorName::Black;
    let mut best_d = f64::INFINITY;
    for name in ColorName::ALL {
        let p = name.prototype().to_lab();
        let d = (0..3).map(|i| (lab[i] - p[i]).powi(2)).sum::<f64>();
        if d < best_d {
            best = name;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototypes_name_themselves() {
        for name in ColorName::ALL {
            assert_eq!(color_name(name.prototype()), name);
        }
    }

    #[test]
    fn hsv_round_trip() {
        let c = ColorRGB::from_hsv(210.0, 0.8, 0.9);
        let (h, s, v) = c.to_hsv();
        assert!((h - 210.0).abs() < 1.0, "{h}");
        assert!((s - 0.8).abs() < 0.01);
        assert!((v - 0.9).abs() < 0.01);
    }

    #[test]
    fn name_parse() {
        assert_eq!("pink".parse::<ColorName>().unwrap(), ColorName::Pink);
        assert!("teal".parse::<ColorName>().is_err());
    }
}
