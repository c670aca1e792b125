use super::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// A pixel belongs to the border when every channel is below this value.
pub const DEFAULT_ROI_THRESHOLD: f64 = 0.02;

/// Smallest frame `center_crop_roi` accepts, per side.
pub const MIN_ROI_INPUT: usize = 32;

/// Region-of-interest crop plus the offsets needed to paste it back.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiCrop {
    pub image: ImageBuffer,
    pub x: usize,
    pub y: usize,
    pub frame_width: usize,
    pub frame_height: usize,
}

impl RoiCrop {
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.y == 0 && self.image.dims() == (self.frame_width, self.frame_height)
    }

    /// Writes `processed` over the crop window of `original`; pixels outside
    /// the window are copied untouched.
    pub fn reassemble(&self, original: &ImageBuffer, processed: &ImageBuffer) -> Result<ImageBuffer> {
        if original.dims() != (self.frame_width, self.frame_height) {
            return Err(Error::DimensionMismatch {
                left: (self.frame_width, self.frame_height),
                right: original.dims(),
            });
        }
        if processed.dims() != self.image.dims() {
            return Err(Error::DimensionMismatch {
                left: self.image.dims(),
                right: processed.dims(),
            });
        }
        let ch = processed.channels();
        let base = if original.channels() == ch {
            original.clone()
        } else if ch == 3 {
            original.to_rgb()
        } else {
            return Err(Error::WrongChannelCount {
                expected: original.channels(),
                found: ch,
            });
        };
        let mut data = base.into_data();
        let (cw, chh) = processed.dims();
        for y in 0..chh {
            let dst = ((self.y + y) * self.frame_width + self.x) * ch;
            let src = y * cw * ch;
            data[dst..dst + cw * ch].copy_from_slice(&processed.data()[src..src + cw * ch]);
        }
        ImageBuffer::new(self.frame_width, self.frame_height, ch, data)
    }
}

pub fn center_crop_roi(img: &ImageBuffer) -> Result<RoiCrop> {
    center_crop_roi_with(img, DEFAULT_ROI_THRESHOLD)
}

/// Crops to the bounding box of pixels with at least one channel at or above `threshold`.
pub fn center_crop_roi_with(img: &ImageBuffer, threshold: f64) -> Result<RoiCrop> {
    let (w, h) = img.dims();
    if w < MIN_ROI_INPUT || h < MIN_ROI_INPUT {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: MIN_ROI_INPUT,
        });
    }
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..h {
        for x in 0..w {
            if img.pixel(x, y).iter().any(|v| *v >= threshold) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::EmptyRoi);
    }
    let cw = x1 - x0 + 1;
    let chh = y1 - y0 + 1;
    let ch = img.channels();
    let mut data = Vec::with_capacity(cw * chh * ch);
    for y in y0..=y1 {
        let start = (y * w + x0) * ch;
        data.extend_from_slice(&img.data()[start..start + cw * ch]);
    }
    Ok(RoiCrop {
        image: ImageBuffer::new(cw, chh, ch, data)?,
        x: x0,
        y: y0,
        frame_width: w,
        frame_height: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(w: usize, h: usize, border: usize) -> ImageBuffer {
        let cx = (w as f64 - 1.0) / 2.0;
        let cy = (h as f64 - 1.0) / 2.0;
        let r = (w.min(h) / 2 - border) as f64;
        ImageBuffer::from_fn(w, h, 3, |x, y, c| {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            if d <= r {
                [0.8, 0.4, 0.2][c]
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn crop_matches_brute_force_bounding_box() {
        let img = disc(100, 80, 20);
        let crop = center_crop_roi(&img).unwrap();
        // Brute force: disc of radius 20 centered at (49.5, 39.5).
        let r = 20.0f64;
        let inside = |x: usize, y: usize| ((x as f64 - 49.5).powi(2) + (y as f64 - 39.5).powi(2)).sqrt() <= r;
        let xs: Vec<usize> = (0..100).filter(|&x| (0..80).any(|y| inside(x, y))).collect();
        let ys: Vec<usize> = (0..80).filter(|&y| (0..100).any(|x| inside(x, y))).collect();
        assert_eq!(crop.x, xs[0]);
        assert_eq!(crop.y, ys[0]);
        assert_eq!(crop.image.width(), xs.last().unwrap() - xs[0] + 1);
        assert_eq!(crop.image.height(), ys.last().unwrap() - ys[0] + 1);
        assert!(crop.x >= 20 && crop.y >= 20);
    }

    #[test]
    fn bright_frame_is_identity() {
        let img = ImageBuffer::filled(40, 40, &[0.5, 0.5, 0.5]).unwrap();
        let crop = center_crop_roi(&img).unwrap();
        assert!(crop.is_identity());
        assert_eq!((crop.x, crop.y), (0, 0));
    }

    #[test]
    fn black_frame_is_empty() {
        let img = ImageBuffer::filled(40, 40, &[0.0, 0.01, 0.0]).unwrap();
        assert!(matches!(center_crop_roi(&img), Err(Error::EmptyRoi)));
        let tiny = ImageBuffer::filled(16, 40, &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(center_crop_roi(&tiny), Err(Error::ImageTooSmall { .. })));
    }

    #[test]
    fn reassemble_restores_frame() {
        let img = disc(64, 64, 10);
        let crop = center_crop_roi(&img).unwrap();
        assert_eq!(crop.reassemble(&img, &crop.image).unwrap(), img);
        let white = ImageBuffer::filled(crop.image.width(), crop.image.height(), &[1.0, 1.0, 1.0]).unwrap();
        let pasted = crop.reassemble(&img, &white).unwrap();
        assert_eq!(pasted.pixel(0, 0), img.pixel(0, 0));
        assert_eq!(pasted.pixel(crop.x, crop.y), &[1.0, 1.0, 1.0]);
    }
}
