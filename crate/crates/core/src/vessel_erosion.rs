//! Vessel erosion guided by an external segmentation mask.
//!
//! Pixels the mask flags as vessel are replaced by a box average of their
//! neighborhood, coarse to fine: patch 32, 16, 8, ... down to `min_patch`.
//! Each scale reads the previous scale's output. Pixels outside the mask
//! are never written.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{box_sum, gaussian_blur, Boundary};
use crate::imgcore::{extract_channel, load_gray, merge_channels, ImageBuffer, Plane};

/// Mask values strictly above this mark vessel pixels.
pub const VESSEL_THRESHOLD: f64 = 0.1;

/// Soft vessel probability per pixel, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselMask {
    values: Plane,
}

impl VesselMask {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidData(format!("mask value {v} outside [0, 1]")));
        }
        Ok(Self {
            values: Plane::new(width, height, values)?,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            values: Plane::filled(width, height, 0.0),
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, values)
    }

    pub fn from_image(img: &ImageBuffer) -> Result<Self> {
        img.require_channels(1)?;
        Self::new(img.width(), img.height(), img.data().to_vec())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    pub fn values(&self) -> &[f64] {
        self.values.data()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values.get(x, y)
    }

    #[inline]
    pub fn is_vessel(&self, x: usize, y: usize) -> bool {
        self.values.get(x, y) > VESSEL_THRESHOLD
    }

    pub fn vessel_count(&self) -> usize {
        self.values.data().iter().filter(|v| **v > VESSEL_THRESHOLD).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErosionKernel {
    #[default]
    Average,
    Gaussian,
}

impl std::str::FromStr for ErosionKernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "average" => Ok(ErosionKernel::Average),
            "gaussian" => Ok(ErosionKernel::Gaussian),
            other => Err(format!("unknown kernel `{other}` (expected average|gaussian)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErosionParams {
    pub start_patch: usize,
    /// The loop runs while `patch >= min_patch`.
    pub min_patch: usize,
    pub kernel: ErosionKernel,
    pub boundary: Boundary,
}

impl Default for ErosionParams {
    fn default() -> Self {
        Self {
            start_patch: 32,
            min_patch: 2,
            kernel: ErosionKernel::Average,
            boundary: Boundary::Wrap,
        }
    }
}

impl ErosionParams {
    pub fn validate(&self) -> Result<()> {
        if ![4, 8, 16, 32, 64].contains(&self.start_patch) {
            return Err(Error::InvalidParameter(format!(
                "start_patch must be one of 4, 8, 16, 32, 64; got {}",
                self.start_patch
            )));
        }
        if self.min_patch < 1 {
            return Err(Error::InvalidParameter("min_patch must be >= 1".into()));
        }
        Ok(())
    }

    /// Patch sizes visited, coarse to fine.
    pub fn scales(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut p = self.start_patch;
        while p >= self.min_patch && p >= 1 {
            out.push(p);
            p /= 2;
        }
        out
    }
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// `blurred` where the mask flags a vessel, `channel` everywhere else.
pub fn choose_side(blurred: &ImageBuffer, channel: &ImageBuffer, mask: &VesselMask) -> Result<ImageBuffer> {
    blurred.require_channels(1)?;
    channel.require_channels(1)?;
    check_dims(blurred.dims(), channel.dims())?;
    check_dims(mask.dims(), channel.dims())?;
    let data = blurred
        .data()
        .iter()
        .zip(channel.data())
        .zip(mask.values())
        .map(|((b, c), m)| if *m > VESSEL_THRESHOLD { *b } else { *c })
        .collect();
    ImageBuffer::new(channel.width(), channel.height(), 1, data)
}

/// `patch x patch` box average; for even sizes the window spans
/// `[i - patch/2, i + patch/2 - 1]`.
pub fn box_average(channel: &Plane, patch: usize, boundary: Boundary) -> Plane {
    let lo = -((patch / 2) as isize);
    let area = (patch * patch) as f64;
    box_sum(channel, patch, lo, boundary).map(|s| s / area)
}

/// Multi-scale erosion of one channel.
pub fn blend_vessel(channel: &ImageBuffer, mask: &VesselMask, p: &ErosionParams) -> Result<ImageBuffer> {
    channel.require_channels(1)?;
    check_dims(mask.dims(), channel.dims())?;
    p.validate()?;
    let mut current = channel.clone();
    if mask.vessel_count() == 0 {
        return Ok(current);
    }
    for patch in p.scales() {
        let mut blurred = box_average(&current.plane(0), patch, p.boundary);
        if p.kernel == ErosionKernel::Gaussian {
            blurred = gaussian_blur(&blurred, patch as f64 / 4.0, p.boundary);
        }
        current = choose_side(&blurred.to_image(), &current, mask)?;
    }
    Ok(current)
}

/// Erodes vessels in each of R, G, B and remerges.
pub fn clean_image(img: &ImageBuffer, mask: &VesselMask, p: &ErosionParams) -> Result<ImageBuffer> {
    img.require_channels(3)?;
    check_dims(mask.dims(), img.dims())?;
    let planes = (0..3)
        .into_par_iter()
        .map(|c| blend_vessel(&extract_channel(img, c)?, mask, p))
        .collect::<Result<Vec<_>>>()?;
    merge_channels(&planes[0], &planes[1], &planes[2])
}

/// Loads a mask image. With `rescale`, a mask whose size differs from
/// `target` is resampled by nearest neighbor; otherwise it is rejected.
pub fn load_mask(path: impl AsRef<Path>, target: (usize, usize), rescale: bool) -> Result<VesselMask> {
    let gray = load_gray(path)?;
    if gray.dims() == target {
        return VesselMask::from_image(&gray);
    }
    if !rescale {
        return Err(Error::DimensionMismatch {
            left: target,
            right: gray.dims(),
        });
    }
    let (sw, sh) = gray.dims();
    let (tw, th) = target;
    VesselMask::from_fn(tw, th, |x, y| {
        let sx = ((x as f64 + 0.5) * sw as f64 / tw as f64).floor() as usize;
        let sy = ((y as f64 + 0.5) * sh as f64 / th as f64).floor() as usize;
        gray.get(sx.min(sw - 1), sy.min(sh - 1), 0)
    })
}
