//! Double-pass fundus reflection restoration tuned for contact-camera
//! (Retcam) images, and its CLAHE hybrid.
//!
//! The observed image is modeled as
//!
//! ```text
//! S = I_ill * T_lens^2 * (T_sc^2 * O + 1 - T_sc)
//! ```
//!
//! with `I_ill` the illumination, `T_lens` the lens transmission, `T_sc`
//! the intra-ocular scatter transmission and `O` the retina. Restoration
//! runs on the ROI crop in three passes:
//!
//! 1. coarse illumination: a smooth per-channel illumination field
//!    (guided filter, regularizer `eps_coarse`) is divided out;
//! 2. fine illumination: the dark channel drives a white-atmosphere
//!    dehaze of the luminance, and channels are rescaled proportionally;
//! 3. scatter suppression: a smooth backscatter floor is subtracted.
//!
//! `T_lens` cannot be separated from `I_ill` with a single image, so it
//! is folded into the illumination field and reported as 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{gaussian_blur, guided_filter, min_filter, Boundary};
use crate::histops::{clahe_rgb3, ClaheParams};
use crate::imgcore::{center_crop_roi_with, luminance, ImageBuffer, Plane, DEFAULT_ROI_THRESHOLD};
use crate::pca_amp::{TransmissionMap, T_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpfrParams {
    /// Guided-filter regularizer for the coarse illumination field.
    pub eps_coarse: f64,
    /// Multiplier on the coarse-stage correction estimate; 2.0 applies it in full.
    pub dehaze_coarse_gain: f64,
    /// Fine-stage dehazing estimate (fraction of the dark channel treated as haze).
    pub dehaze_fine: f64,
    /// Weight of the subtracted backscatter floor.
    pub scatter_strength: f64,
    pub roi_threshold: f64,
}

impl Default for DpfrParams {
    /// Retcam-tuned values.
    fn default() -> Self {
        Self {
            eps_coarse: 1e-3,
            dehaze_coarse_gain: 2.0,
            dehaze_fine: 0.25,
            scatter_strength: 0.3,
            roi_threshold: DEFAULT_ROI_THRESHOLD,
        }
    }
}

impl DpfrParams {
    /// The untuned settings the Retcam values are derived from.
    pub fn reference() -> Self {
        Self {
            eps_coarse: 1e-2,
            dehaze_coarse_gain: 1.0,
            dehaze_fine: 0.95,
            scatter_strength: 0.3,
            roi_threshold: DEFAULT_ROI_THRESHOLD,
        }
    }

    /// Full-pipeline check: every parameter finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.fields() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Per-stage check: zero is allowed so each stage can be switched off.
    fn validate_stage(&self) -> Result<()> {
        for (name, v) in self.fields() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("roi_threshold", self.roi_threshold),
            ("eps_coarse", self.eps_coarse),
            ("dehaze_coarse_gain", self.dehaze_coarse_gain),
            ("dehaze_fine", self.dehaze_fine),
            ("scatter_strength", self.scatter_strength),
        ]
    }
}

/// Window sizes scale with the ROI so results do not depend on resolution.
#[derive(Debug, Clone, Copy)]
struct Scales {
    coarse_radius: usize,
    patch: usize,
    scatter_sigma: f64,
}

impl Scales {
    fn for_dims(w: usize, h: usize) -> Self {
        let short = w.min(h);
        let patch = (short / 32).max(3) | 1;
        Self {
            coarse_radius: (short / 8).max(4),
            patch,
            scatter_sigma: (short as f64 / 16.0).max(2.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoarseOutput {
    pub image: ImageBuffer,
    /// Relative illumination per channel (`1.0` = reference brightness).
    pub illumination: Vec<Plane>,
}

#[derive(Debug, Clone)]
pub struct FineOutput {
    pub image: ImageBuffer,
    pub transmission: TransmissionMap,
}

#[derive(Debug, Clone)]
pub struct ScatterOutput {
    pub image: ImageBuffer,
    /// Smooth backscatter floor that was subtracted, before weighting.
    pub floor: Plane,
}

fn percentile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let idx = ((values.len() - 1) as f64 * q).round() as usize;
    values[idx]
}

/// Estimates and divides out a smooth illumination field per channel.
pub fn coarse_illumination(img: &ImageBuffer, p: &DpfrParams) -> Result<CoarseOutput> {
    img.require_channels(3)?;
    p.validate_stage()?;
    let planes = img.planes();
    for (c, plane) in planes.iter().enumerate() {
        if plane.data().iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateImage(format!("channel {c} is zero everywhere")));
        }
    }
    let scales = Scales::for_dims(img.width(), img.height());
    let fg: Vec<bool> = img
        .data()
        .chunks_exact(3)
        .map(|px| px.iter().any(|v| *v >= p.roi_threshold))
        .collect();
    let strength = (0.5 * p.dehaze_coarse_gain).min(1.0);
    let floor = 1.0 / 255.0;

    let mut corrected = Vec::with_capacity(3);
    let mut illumination = Vec::with_capacity(3);
    for plane in &planes {
        let field = guided_filter(plane, plane, scales.coarse_radius, p.eps_coarse.max(1e-12)).map(|v| v.max(floor));
        let mut lit: Vec<f64> = field
            .data()
            .iter()
            .zip(&fg)
            .filter_map(|(v, f)| f.then_some(*v))
            .collect();
        if lit.is_empty() {
            lit = field.data().to_vec();
        }
        let target = percentile(&mut lit, 0.95);
        corrected.push(plane.zip_map(&field, |s, k| s * (target / k).powf(strength)));
        illumination.push(field.map(|k| k / target));
    }
    Ok(CoarseOutput {
        image: ImageBuffer::from_planes(&corrected)?,
        illumination,
    })
}

/// Dark-channel dehaze of the luminance against a white atmosphere, with
/// channels rescaled by the luminance gain.
pub fn fine_illumination(img: &ImageBuffer, p: &DpfrParams) -> Result<FineOutput> {
    img.require_channels(3)?;
    p.validate_stage()?;
    let (w, h) = img.dims();
    if p.dehaze_fine == 0.0 {
        return Ok(FineOutput {
            image: img.clone(),
            transmission: TransmissionMap::uniform(w, h, 1.0)?,
        });
    }
    let scales = Scales::for_dims(w, h);
    let mins = Plane::new(w, h, img.data().chunks_exact(3).map(|px| px[0].min(px[1]).min(px[2])).collect())?;
    let dark = min_filter(&mins, scales.patch);
    let luma = luminance(img)?;
    let raw_t = dark.map(|d| 1.0 - p.dehaze_fine * d);
    let t = TransmissionMap::from_plane(&guided_filter(&luma, &raw_t, 2 * scales.patch, 1e-3), T_MIN)?;

    let tp = t.plane().data();
    let gain: Vec<f64> = luma
        .data()
        .iter()
        .zip(tp)
        .map(|(y, t)| {
            if *y <= 1e-6 {
                1.0
            } else {
                ((y - (1.0 - t)) / t).max(0.0) / y
            }
        })
        .collect();
    let data = img.data().iter().enumerate().map(|(i, v)| v * gain[i / 3]).collect();
    Ok(FineOutput {
        image: ImageBuffer::from_clamped(w, h, 3, data)?,
        transmission: t,
    })
}

/// Subtracts a smooth backscatter floor, estimated as the blurred dark channel.
pub fn scatter_suppression(img: &ImageBuffer, p: &DpfrParams) -> Result<ScatterOutput> {
    img.require_channels(3)?;
    p.validate_stage()?;
    let (w, h) = img.dims();
    let scales = Scales::for_dims(w, h);
    let mins = Plane::new(w, h, img.data().chunks_exact(3).map(|px| px[0].min(px[1]).min(px[2])).collect())?;
    let floor = gaussian_blur(&min_filter(&mins, scales.patch), scales.scatter_sigma, Boundary::Clamp);
    if p.scatter_strength == 0.0 {
        return Ok(ScatterOutput {
            image: img.clone(),
            floor,
        });
    }
    let fd = floor.data();
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| v - p.scatter_strength * fd[i / 3])
        .collect();
    Ok(ScatterOutput {
        image: ImageBuffer::from_clamped(w, h, 3, data)?,
        floor,
    })
}

/// Estimated fields of the double-pass reflection model for one run.
#[derive(Debug, Clone)]
pub struct ReflectionModel {
    pub observed: ImageBuffer,
    pub illumination: Vec<Plane>,
    pub lens_transmission: Plane,
    pub scatter_transmission: Plane,
    pub restored: ImageBuffer,
}

impl ReflectionModel {
    /// RMS of `S - I_ill * T_lens^2 * (T_sc^2 * O + 1 - T_sc)` over all samples.
    pub fn residual(&self) -> f64 {
        let (w, h) = self.observed.dims();
        let mut acc = 0.0;
        for y in 0..h {
            for x in 0..w {
                let tl = self.lens_transmission.get(x, y);
                let ts = self.scatter_transmission.get(x, y);
                for c in 0..3 {
                    let model = self.illumination[c].get(x, y) * tl * tl * (ts * ts * self.restored.get(x, y, c) + 1.0 - ts);
                    acc += (self.observed.get(x, y, c) - model).powi(2);
                }
            }
        }
        (acc / (w * h * 3) as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct DpfrResult {
    pub image: ImageBuffer,
    pub model: ReflectionModel,
}

/// DPFRr with the Retcam-tuned defaults.
pub fn dpfrr(img: &ImageBuffer) -> Result<ImageBuffer> {
    dpfrr_with(img, &DpfrParams::default())
}

pub fn dpfrr_with(img: &ImageBuffer, p: &DpfrParams) -> Result<ImageBuffer> {
    Ok(dpfrr_with_model(img, p)?.image)
}

/// Crop, coarse, fine, scatter, then paste back; pixels outside the ROI
/// bounding box are copied from the input.
pub fn dpfrr_with_model(img: &ImageBuffer, p: &DpfrParams) -> Result<DpfrResult> {
    img.require_channels(3)?;
    p.validate()?;
    let crop = center_crop_roi_with(img, p.roi_threshold)?;
    let coarse = coarse_illumination(&crop.image, p)?;
    let fine = fine_illumination(&coarse.image, p)?;
    let scatter = scatter_suppression(&fine.image, p)?;

    let (w, h) = crop.image.dims();
    let scatter_t = scatter.floor.map(|f| (1.0 - p.scatter_strength * f).clamp(T_MIN, 1.0));
    let model = ReflectionModel {
        observed: crop.image.clone(),
        illumination: coarse.illumination,
        lens_transmission: Plane::filled(w, h, 1.0),
        scatter_transmission: scatter_t,
        restored: scatter.image.clone(),
    };
    Ok(DpfrResult {
        image: crop.reassemble(img, &scatter.image)?,
        model,
    })
}

/// DPFRr followed by three-channel CLAHE (clip 2.0).
pub fn dpfrr_clahe(img: &ImageBuffer) -> Result<ImageBuffer> {
    dpfrr_clahe_with(img, &DpfrParams::default(), &ClaheParams::default())
}

pub fn dpfrr_clahe_with(img: &ImageBuffer, p: &DpfrParams, clahe: &ClaheParams) -> Result<ImageBuffer> {
    clahe_rgb3(&dpfrr_with(img, p)?, clahe)
}
