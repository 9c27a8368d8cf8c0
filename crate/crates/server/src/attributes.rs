use serde::Serialize;
use texelatt_core::descriptor::{COMPONENT_LABELS, DESCRIPTOR_LEN};

/// Plain-language reading of each descriptor component, in component order.
pub const INTERPRETATIONS: [&str; DESCRIPTOR_LEN] = [
    "share of texels that are circles",
    "share of texels that are lines",
    "share of texels that are polygons",
    "share of black texels",
    "share of white texels",
    "share of grey texels",
    "share of red texels",
    "share of orange texels",
    "share of yellow texels",
    "share of green texels",
    "share of blue texels",
    "share of purple texels",
    "share of pink texels",
    "share of brown texels",
    "texels pointing between 0 and 60 degrees",
    "texels pointing between 60 and 120 degrees",
    "texels pointing between 120 and 180 degrees",
    "how large the texels are",
    "how crowded the texels are",
    "how evenly the texels cover the image",
    "neighbouring texels aligned between 0 and 60 degrees",
    "neighbouring texels aligned between 60 and 120 degrees",
    "neighbouring texels aligned between 120 and 180 degrees",
    "how irregular the layout looks when mirrored locally (0 is perfectly symmetric)",
    "how irregular the layout looks when shifted by one texel step (0 is a perfect lattice)",
    "background is black",
    "background is white",
    "background is grey",
    "background is red",
    "background is orange",
    "background is yellow",
    "background is green",
    "background is blue",
    "background is purple",
    "background is pink",
    "background is brown",
];

#[derive(Clone, Debug, Serialize)]
pub struct AttributeInfo {
    pub label: &'static str,
    pub description: &'static str,
}

pub fn attribute_info() -> Vec<AttributeInfo> {
    COMPONENT_LABELS
        .iter()
        .zip(INTERPRETATIONS)
        .map(|(&label, description)| AttributeInfo { label, description })
        .collect()
}
