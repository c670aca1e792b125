//! Histogram equalization, CLAHE and the CLAHE-green-HE (CGH) method.
//!
//! Intensities are binned into 256 levels (`round(v * 255)`). The
//! equalization mapping is `cdf(bin) / total` with an inclusive CDF, which
//! leaves a uniform ramp unchanged to within one level. A flat input has
//! no contrast to redistribute and is returned unchanged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{extract_channel, merge_channels, ImageBuffer};

pub const BINS: usize = 256;

/// Smallest tile edge CLAHE accepts.
pub const MIN_TILE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaheParams {
    /// Histogram cap as a multiple of the mean bin count; `f64::INFINITY` disables clipping.
    pub clip_limit: f64,
    /// Contextual regions as (rows, cols).
    pub tile_grid: (usize, usize),
}

impl Default for ClaheParams {
    fn default() -> Self {
        Self {
            clip_limit: 2.0,
            tile_grid: (8, 8),
        }
    }
}

impl ClaheParams {
    pub fn new(clip_limit: f64, tile_grid: (usize, usize)) -> Result<Self> {
        let p = Self { clip_limit, tile_grid };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clip_limit.is_nan() || self.clip_limit < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "clip_limit must be >= 1.0, got {}",
                self.clip_limit
            )));
        }
        if self.tile_grid.0 == 0 || self.tile_grid.1 == 0 {
            return Err(Error::InvalidParameter("tile grid dimensions must be >= 1".into()));
        }
        Ok(())
    }
}

#[inline]
fn bin_of(v: f64) -> usize {
    ((v * (BINS - 1) as f64).round() as usize).min(BINS - 1)
}

/// Maps a (possibly fractional) histogram to its normalized inclusive CDF.
fn cdf_lut(hist: &[f64; BINS]) -> [f64; BINS] {
    let total: f64 = hist.iter().sum();
    let mut lut = [0.0; BINS];
    let mut acc = 0.0;
    for (i, h) in hist.iter().enumerate() {
        acc += h;
        lut[i] = (acc / total).min(1.0);
    }
    lut
}

/// Global histogram equalization of a single-channel image.
pub fn hist_equalize(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.require_channels(1)?;
    if img.is_constant() {
        return Ok(img.clone());
    }
    let mut hist = [0.0; BINS];
    for v in img.data() {
        hist[bin_of(*v)] += 1.0;
    }
    let lut = cdf_lut(&hist);
    Ok(img.map(|v| lut[bin_of(v)]))
}

/// Clips `hist` at `limit` and spreads the excess uniformly over all bins in one pass.
fn clip_histogram(hist: &mut [f64; BINS], limit: f64) {
    if !limit.is_finite() {
        return;
    }
    let mut excess = 0.0;
    for h in hist.iter_mut() {
        if *h > limit {
            excess += *h - limit;
            *h = limit;
        }
    }
    let share = excess / BINS as f64;
    hist.iter_mut().for_each(|h| *h += share);
}

/// Tile boundaries along one axis; tiles differ in size by at most one pixel.
fn tile_bounds(len: usize, n: usize) -> Vec<usize> {
    (0..=n).map(|i| i * len / n).collect()
}

/// Locates `pos` (pixel center) between tile centers: returns (lower tile, upper tile, weight of upper).
fn interp_index(pos: f64, centers: &[f64]) -> (usize, usize, f64) {
    let last = centers.len() - 1;
    if pos <= centers[0] {
        return (0, 0, 0.0);
    }
    if pos >= centers[last] {
        return (last, last, 0.0);
    }
    let i = centers.iter().rposition(|c| *c <= pos).unwrap_or(0).min(last - 1);
    let w = (pos - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, w)
}

/// Contrast-limited adaptive histogram equalization on a single channel.
///
/// Each tile's histogram is clipped at `clip_limit * tile_pixels / 256`,
/// the excess is redistributed, and the resulting mappings are blended
/// bilinearly between tile centers (clamped at the frame edges).
pub fn clahe_channel(img: &ImageBuffer, p: &ClaheParams) -> Result<ImageBuffer> {
    img.require_channels(1)?;
    p.validate()?;
    let (w, h) = img.dims();
    let (rows, cols) = p.tile_grid;
    let ys = tile_bounds(h, rows);
    let xs = tile_bounds(w, cols);
    let min_tw = (0..cols).map(|i| xs[i + 1] - xs[i]).min().unwrap_or(0);
    let min_th = (0..rows).map(|i| ys[i + 1] - ys[i]).min().unwrap_or(0);
    if min_tw < MIN_TILE || min_th < MIN_TILE {
        return Err(Error::TileTooSmall {
            tile_w: min_tw,
            tile_h: min_th,
        });
    }
    if img.is_constant() {
        return Ok(img.clone());
    }

    let bins: Vec<usize> = img.data().iter().map(|v| bin_of(*v)).collect();
    let mut luts = Vec::with_capacity(rows * cols);
    for ty in 0..rows {
        for tx in 0..cols {
            let mut hist = [0.0; BINS];
            for y in ys[ty]..ys[ty + 1] {
                for x in xs[tx]..xs[tx + 1] {
                    hist[bins[y * w + x]] += 1.0;
                }
            }
            let area = ((ys[ty + 1] - ys[ty]) * (xs[tx + 1] - xs[tx])) as f64;
            clip_histogram(&mut hist, p.clip_limit * area / BINS as f64);
            luts.push(cdf_lut(&hist));
        }
    }

    let cy: Vec<f64> = (0..rows).map(|i| 0.5 * (ys[i] + ys[i + 1]) as f64).collect();
    let cx: Vec<f64> = (0..cols).map(|i| 0.5 * (xs[i] + xs[i + 1]) as f64).collect();
    let col_interp: Vec<_> = (0..w).map(|x| interp_index(x as f64 + 0.5, &cx)).collect();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let (r0, r1, wy) = interp_index(y as f64 + 0.5, &cy);
        for x in 0..w {
            let (c0, c1, wx) = col_interp[x];
            let b = bins[y * w + x];
            let top = (1.0 - wx) * luts[r0 * cols + c0][b] + wx * luts[r0 * cols + c1][b];
            let bottom = (1.0 - wx) * luts[r1 * cols + c0][b] + wx * luts[r1 * cols + c1][b];
            out[y * w + x] = (1.0 - wy) * top + wy * bottom;
        }
    }
    ImageBuffer::from_clamped(w, h, 1, out)
}

/// CLAHE applied independently to R, G and B, then remerged.
pub fn clahe_rgb3(img: &ImageBuffer, p: &ClaheParams) -> Result<ImageBuffer> {
    img.require_channels(3)?;
    let planes = (0..3)
        .into_par_iter()
        .map(|c| clahe_channel(&extract_channel(img, c)?, p))
        .collect::<Result<Vec<_>>>()?;
    merge_channels(&planes[0], &planes[1], &planes[2])
}

/// CLAHE on all three channels, keep green, then global histogram equalization.
pub fn cgh(img: &ImageBuffer, p: &ClaheParams) -> Result<ImageBuffer> {
    img.require_channels(3)?;
    let clahe = clahe_rgb3(img, p)?;
    hist_equalize(&extract_channel(&clahe, 1)?)
}
