use std::f64::consts::PI;

use super::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Lanczos kernel order.
pub const LANCZOS_ORDER: f64 = 3.0;

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

fn lanczos(x: f64, a: f64) -> f64 {
    if x.abs() < a {
        sinc(x) * sinc(x / a)
    } else {
        0.0
    }
}

/// Normalized contribution weights for one output coordinate.
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

fn taps(src_len: usize, dst_len: usize) -> Vec<Taps> {
    let scale = src_len as f64 / dst_len as f64;
    // Widen the kernel when minifying so it acts as a low-pass filter.
    let filter_scale = scale.max(1.0);
    let support = LANCZOS_ORDER * filter_scale;
    (0..dst_len)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale;
            let lo = (center - support).floor().max(0.0) as usize;
            let hi = ((center + support).ceil() as usize).min(src_len);
            let mut weights: Vec<f64> = (lo..hi)
                .map(|j| lanczos((j as f64 + 0.5 - center) / filter_scale, LANCZOS_ORDER))
                .collect();
            let sum: f64 = weights.iter().sum();
            if sum.abs() > f64::EPSILON {
                weights.iter_mut().for_each(|w| *w /= sum);
            }
            Taps { start: lo, weights }
        })
        .collect()
}

/// Separable Lanczos-3 resampling; output is clamped to `[0, 1]`.
pub fn resize_lanczos(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    if img.dims() == (width, height) {
        return Ok(img.clone());
    }
    let ch = img.channels();
    let (sw, sh) = img.dims();
    let src = img.data();

    let htaps = taps(sw, width);
    let mut horiz = vec![0.0; width * sh * ch];
    for y in 0..sh {
        for (x, t) in htaps.iter().enumerate() {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, w) in t.weights.iter().enumerate() {
                    acc += w * src[(y * sw + t.start + k) * ch + c];
                }
                horiz[(y * width + x) * ch + c] = acc;
            }
        }
    }

    let vtaps = taps(sh, height);
    let mut out = vec![0.0; width * height * ch];
    for (y, t) in vtaps.iter().enumerate() {
        for x in 0..width {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, w) in t.weights.iter().enumerate() {
                    acc += w * horiz[((t.start + k) * width + x) * ch + c];
                }
                out[(y * width + x) * ch + c] = acc;
            }
        }
    }
    ImageBuffer::from_clamped(width, height, ch, out)
}
