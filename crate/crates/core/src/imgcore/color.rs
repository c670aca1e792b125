//! Channel manipulation and color-space conversions.
//!
//! YCrCb follows ITU-R BT.601 in the normalized offset form used by
//! OpenCV (`Cr`, `Cb` centered at 0.5). Lab is CIE L\*a\*b\* with a D65
//! white point over sRGB primaries, stored as `L/100` and `(a + 128)/255`,
//! `(b + 128)/255` so that every channel fits the unit interval.

use serde::{Deserialize, Serialize};

use super::buffer::{ImageBuffer, Plane};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorSpace {
    Rgb,
    Gray,
    YCrCb,
    Lab,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            _ => 3,
        }
    }
}

/// Grayscale weights applied to (R, G, B).
pub const GRAY_WEIGHTS: [f64; 3] = [0.3, 0.59, 0.11];

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// `0.3 R + 0.59 G + 0.11 B` per pixel.
pub fn to_grayscale(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.require_channels(3)?;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|px| GRAY_WEIGHTS[0] * px[0] + GRAY_WEIGHTS[1] * px[1] + GRAY_WEIGHTS[2] * px[2])
        .collect();
    ImageBuffer::from_clamped(img.width(), img.height(), 1, data)
}

pub fn extract_channel(img: &ImageBuffer, idx: usize) -> Result<ImageBuffer> {
    if idx >= img.channels() {
        return Err(Error::IndexOutOfRange {
            index: idx,
            channels: img.channels(),
        });
    }
    Ok(img.plane(idx).to_image())
}

pub fn merge_channels(r: &ImageBuffer, g: &ImageBuffer, b: &ImageBuffer) -> Result<ImageBuffer> {
    for p in [r, g, b] {
        p.require_channels(1)?;
        if p.dims() != r.dims() {
            return Err(Error::DimensionMismatch {
                left: r.dims(),
                right: p.dims(),
            });
        }
    }
    let data = r
        .data()
        .iter()
        .zip(g.data())
        .zip(b.data())
        .flat_map(|((r, g), b)| [*r, *g, *b])
        .collect();
    ImageBuffer::new(r.width(), r.height(), 3, data)
}

/// BT.601 luma of an RGB image as an unclamped plane.
pub fn luminance(img: &ImageBuffer) -> Result<Plane> {
    img.require_channels(3)?;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|px| KR * px[0] + KG * px[1] + KB * px[2])
        .collect();
    Plane::new(img.width(), img.height(), data)
}

/// Converts between color spaces, routing through RGB.
///
/// Gray can only be promoted to RGB (by replication) or left as is;
/// promoting it straight into a chroma space is rejected because the
/// chroma would be invented.
pub fn convert_colorspace(img: &ImageBuffer, from: ColorSpace, to: ColorSpace) -> Result<ImageBuffer> {
    if img.channels() != from.channels() {
        return Err(Error::WrongChannelCount {
            expected: from.channels(),
            found: img.channels(),
        });
    }
    if from == to {
        return Ok(img.clone());
    }
    if from == ColorSpace::Gray && to != ColorSpace::Rgb {
        return Err(Error::UnsupportedConversion { from, to });
    }
    let rgb = match from {
        ColorSpace::Rgb => img.clone(),
        ColorSpace::Gray => img.to_rgb(),
        ColorSpace::YCrCb => map_pixels(img, ycrcb_to_rgb)?,
        ColorSpace::Lab => map_pixels(img, lab_to_rgb)?,
    };
    match to {
        ColorSpace::Rgb => Ok(rgb),
        ColorSpace::Gray => to_grayscale(&rgb),
        ColorSpace::YCrCb => map_pixels(&rgb, rgb_to_ycrcb),
        ColorSpace::Lab => map_pixels(&rgb, rgb_to_lab),
    }
}

fn map_pixels(img: &ImageBuffer, f: fn([f64; 3]) -> [f64; 3]) -> Result<ImageBuffer> {
    let data = img
        .data()
        .chunks_exact(3)
        .flat_map(|px| f([px[0], px[1], px[2]]))
        .collect();
    ImageBuffer::from_clamped(img.width(), img.height(), 3, data)
}

fn rgb_to_ycrcb([r, g, b]: [f64; 3]) -> [f64; 3] {
    let y = KR * r + KG * g + KB * b;
    let cr = (r - y) / (2.0 * (1.0 - KR)) + 0.5;
    let cb = (b - y) / (2.0 * (1.0 - KB)) + 0.5;
    [y, cr, cb]
}

fn ycrcb_to_rgb([y, cr, cb]: [f64; 3]) -> [f64; 3] {
    let r = y + 2.0 * (1.0 - KR) * (cr - 0.5);
    let b = y + 2.0 * (1.0 - KB) * (cb - 0.5);
    let g = (y - KR * r - KB * b) / KG;
    [r, g, b]
}

// D65 reference white, XYZ scaled so Y_white = 1.
const WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.003_130_8 {
        12.92 * c
    } else {
        1.055 * c.max(0.0).powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    const D: f64 = 6.0 / 29.0;
    if t > D * D * D {
        t.cbrt()
    } else {
        t / (3.0 * D * D) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    const D: f64 = 6.0 / 29.0;
    if t > D {
        t * t * t
    } else {
        3.0 * D * D * (t - 4.0 / 29.0)
    }
}

fn rgb_to_lab([r, g, b]: [f64; 3]) -> [f64; 3] {
    let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let (fx, fy, fz) = (lab_f(x / WHITE[0]), lab_f(y / WHITE[1]), lab_f(z / WHITE[2]));
    let l = 116.0 * fy - 16.0;
    let a = 500.0 * (fx - fy);
    let bb = 200.0 * (fy - fz);
    [l / 100.0, (a + 128.0) / 255.0, (bb + 128.0) / 255.0]
}

fn lab_to_rgb([l, a, b]: [f64; 3]) -> [f64; 3] {
    let (l, a, b) = (l * 100.0, a * 255.0 - 128.0, b * 255.0 - 128.0);
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let (x, y, z) = (
        WHITE[0] * lab_f_inv(fx),
        WHITE[1] * lab_f_inv(fy),
        WHITE[2] * lab_f_inv(fz),
    );
    let r = 3.240_454_2 * x - 1.537_138_5 * y - 0.498_531_4 * z;
    let g = -0.969_266_0 * x + 1.876_010_8 * y + 0.041_556_0 * z;
    let bl = 0.055_643_4 * x - 0.204_025_9 * y + 1.057_225_2 * z;
    [linear_to_srgb(r), linear_to_srgb(g), linear_to_srgb(bl)]
}
