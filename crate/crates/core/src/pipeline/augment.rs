use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::imgcore::ImageBuffer;

/// Largest rotation angle, in degrees, either direction.
pub const MAX_ROTATION_DEG: f64 = 15.0;
/// Largest brightness change, as a fraction, either direction.
pub const MAX_BRIGHTNESS: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentOp {
    HFlip,
    VFlip,
    /// Random angle in `[-15, 15]` degrees.
    Rot15,
    /// Random gain in `[0.9, 1.1]`.
    Brightness,
}

impl AugmentOp {
    pub fn tag(self) -> &'static str {
        match self {
            AugmentOp::HFlip => "hflip",
            AugmentOp::VFlip => "vflip",
            AugmentOp::Rot15 => "rot15",
            AugmentOp::Brightness => "brightness",
        }
    }
}

impl fmt::Display for AugmentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AugmentOp {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hflip" => Ok(AugmentOp::HFlip),
            "vflip" => Ok(AugmentOp::VFlip),
            "rot15" | "rot" | "rotate" => Ok(AugmentOp::Rot15),
            "brightness" | "bright10" | "bright" => Ok(AugmentOp::Brightness),
            other => Err(format!("unknown augmentation `{other}` (expected hflip|vflip|rot15|brightness)")),
        }
    }
}

/// Parses a comma-separated list such as `hflip,rot15`. Empty input is no ops.
pub fn parse_ops(s: &str) -> std::result::Result<Vec<AugmentOp>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

pub fn hflip(img: &ImageBuffer) -> ImageBuffer {
    let w = img.width();
    ImageBuffer::from_fn(w, img.height(), img.channels(), |x, y, c| img.get(w - 1 - x, y, c))
        .expect("same dimensions as a valid image")
}

pub fn vflip(img: &ImageBuffer) -> ImageBuffer {
    let h = img.height();
    ImageBuffer::from_fn(img.width(), h, img.channels(), |x, y, c| img.get(x, h - 1 - y, c))
        .expect("same dimensions as a valid image")
}

/// Rotates about the image centre with bilinear sampling; uncovered pixels are black.
pub fn rotate(img: &ImageBuffer, degrees: f64) -> ImageBuffer {
    let (w, h) = img.dims();
    let (sin, cos) = degrees.to_radians().sin_cos();
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    ImageBuffer::from_fn(w, h, img.channels(), |x, y, c| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let sx = cos * dx + sin * dy + cx;
        let sy = -sin * dx + cos * dy + cy;
        bilinear(img, sx, sy, c)
    })
    .expect("same dimensions as a valid image")
}

fn bilinear(img: &ImageBuffer, x: f64, y: f64, c: usize) -> f64 {
    let (w, h) = img.dims();
    if x < -0.5 || y < -0.5 || x > w as f64 - 0.5 || y > h as f64 - 0.5 {
        return 0.0;
    }
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
    let bottom = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
    top * (1.0 - fy) + bottom * fy
}

pub fn brightness(img: &ImageBuffer, gain: f64) -> ImageBuffer {
    img.map(|v| (v * gain).clamp(0.0, 1.0))
}

/// The original followed by one variant per op, each applied to the
/// original. Random parameters come from a ChaCha stream seeded with `seed`.
pub fn augment(img: &ImageBuffer, ops: &[AugmentOp], seed: u64) -> Vec<ImageBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(ops.len() + 1);
    out.push(img.clone());
    for op in ops {
        out.push(match op {
            AugmentOp::HFlip => hflip(img),
            AugmentOp::VFlip => vflip(img),
            AugmentOp::Rot15 => rotate(img, rng.gen_range(-MAX_ROTATION_DEG..=MAX_ROTATION_DEG)),
            AugmentOp::Brightness => brightness(img, 1.0 + rng.gen_range(-MAX_BRIGHTNESS..=MAX_BRIGHTNESS)),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 3, |x, y, c| ((x * 7 + y * 13 + c * 5) % 97) as f64 / 96.0).unwrap()
    }

    #[test]
    fn empty_ops_keep_original_only() {
        let img = ramp(9, 7);
        assert_eq!(augment(&img, &[], 3), vec![img]);
    }

    #[test]
    fn flips_are_involutions() {
        let img = ramp(9, 7);
        assert_eq!(hflip(&hflip(&img)), img);
        assert_eq!(vflip(&vflip(&img)), img);
        assert_eq!(hflip(&img).get(0, 2, 1), img.get(8, 2, 1));
        assert_eq!(vflip(&img).get(3, 0, 2), img.get(3, 6, 2));
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let img = ramp(32, 24);
        let ops = parse_ops("hflip,vflip,rot15,brightness").unwrap();
        let a = augment(&img, &ops, 42);
        let b = augment(&img, &ops, 42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert_eq!(a[0], img);
        assert_ne!(augment(&img, &ops, 43)[3], a[3]);
    }

    #[test]
    fn zero_rotation_is_identity() {
        let img = ramp(16, 12);
        let out = rotate(&img, 0.0);
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_turn_of_square() {
        let img = ramp(9, 9);
        let out = rotate(&img, 90.0);
        // Output (x, y) samples source (y, 8 - x).
        for y in 0..9 {
            for x in 0..9 {
                assert!((out.get(x, y, 0) - img.get(y, 8 - x, 0)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn parse_rejects_unknown() {
        assert_eq!(parse_ops("").unwrap(), vec![]);
        assert_eq!(parse_ops("hflip, rot").unwrap(), vec![AugmentOp::HFlip, AugmentOp::Rot15]);
        assert!(parse_ops("shear").is_err());
    }

    proptest! {
        #[test]
        fn brightness_stays_in_range(gain in 0.9f64..1.1, seed in 0u64..50) {
            let img = ImageBuffer::from_fn(8, 8, 3, |x, y, c| ((x + y * 8 + c + seed as usize) % 17) as f64 / 16.0).unwrap();
            let out = brightness(&img, gain);
            prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
