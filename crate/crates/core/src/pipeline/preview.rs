use std::path::Path;

use crate::error::{Error, Result};
use crate::imgcore::{save_image, ImageBuffer};

pub const MAX_PREVIEW_PAIRS: usize = 8;

/// Two-row grid: `before` on top, `after` below. Every cell is sized to the
/// largest input and each image is centred in its cell on black.
pub fn compose_grid(before: &[ImageBuffer], after: &[ImageBuffer]) -> Result<ImageBuffer> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch {
            left: before.len(),
            right: after.len(),
        });
    }
    if before.is_empty() {
        return Err(Error::EmptyInput("preview needs at least one pair".into()));
    }
    if before.len() > MAX_PREVIEW_PAIRS {
        return Err(Error::InvalidParameter(format!(
            "preview takes at most {MAX_PREVIEW_PAIRS} pairs, got {}",
            before.len()
        )));
    }
    let all = || before.iter().chain(after);
    let cell_w = all().map(ImageBuffer::width).max().unwrap_or(1);
    let cell_h = all().map(ImageBuffer::height).max().unwrap_or(1);
    let n = before.len();
    let (w, h) = (cell_w * n, cell_h * 2);
    let mut data = vec![0.0; w * h * 3];
    for (row, images) in [before, after].into_iter().enumerate() {
        for (col, img) in images.iter().enumerate() {
            let rgb = img.to_rgb();
            let ox = col * cell_w + (cell_w - rgb.width()) / 2;
            let oy = row * cell_h + (cell_h - rgb.height()) / 2;
            for y in 0..rgb.height() {
                let dst = ((oy + y) * w + ox) * 3;
                let src = y * rgb.width() * 3;
                data[dst..dst + rgb.width() * 3].copy_from_slice(&rgb.data()[src..src + rgb.width() * 3]);
            }
        }
    }
    ImageBuffer::new(w, h, 3, data)
}

/// Writes [`compose_grid`] as a PNG.
pub fn preview_grid(before: &[ImageBuffer], after: &[ImageBuffer], path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let grid = compose_grid(before, after)?;
    save_image(&grid, path)?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_pairs_make_two_by_three() {
        let a = ImageBuffer::filled(10, 8, &[0.2, 0.4, 0.6]).unwrap();
        let b = ImageBuffer::filled(10, 8, &[0.9, 0.1, 0.3]).unwrap();
        let grid = compose_grid(&[a.clone(), a.clone(), a], &[b.clone(), b.clone(), b]).unwrap();
        assert_eq!(grid.dims(), (30, 16));
        assert_eq!(grid.pixel(25, 3), &[0.2, 0.4, 0.6]);
        assert_eq!(grid.pixel(25, 12), &[0.9, 0.1, 0.3]);
    }

    #[test]
    fn mixed_sizes_are_letterboxed() {
        let big = ImageBuffer::filled(10, 10, &[1.0, 1.0, 1.0]).unwrap();
        let small = ImageBuffer::filled(4, 6, &[0.5]).unwrap();
        let grid = compose_grid(&[big.clone(), small], &[big.clone(), big]).unwrap();
        assert_eq!(grid.dims(), (20, 20));
        // Small gray image centred in the second top cell, black around it.
        assert_eq!(grid.pixel(10, 0), &[0.0, 0.0, 0.0]);
        assert_eq!(grid.pixel(13, 2), &[0.5, 0.5, 0.5]);
        assert_eq!(grid.pixel(13, 1), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn errors() {
        let a = ImageBuffer::filled(4, 4, &[0.5]).unwrap();
        assert!(matches!(compose_grid(&[], &[]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            compose_grid(&[a.clone()], &[]),
            Err(Error::LengthMismatch { .. })
        ));
        let nine = vec![a; 9];
        assert!(compose_grid(&nine, &nine).is_err());
    }

    #[test]
    fn writes_png() {
        let dir = tempfile::tempdir().unwrap();
        let a = ImageBuffer::filled(6, 6, &[0.3, 0.3, 0.3]).unwrap();
        let path = dir.path().join("grid.png");
        preview_grid(&[a.clone()], &[a], &path).unwrap();
        assert_eq!(crate::imgcore::load_image(&path).unwrap().dims(), (6, 12));
    }
}
