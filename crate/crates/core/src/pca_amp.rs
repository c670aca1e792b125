//! Pixel color amplification with automatic illumination selection (PCAr).
//!
//! Eight amplification candidates are built from one normalized depth map:
//! four transmission-map variants, each recovered against a black
//! atmosphere (A-D, brightening) and a white one (W-Z, darkening). Every
//! candidate is scored by how far its median luminance sits from 0.5; the
//! best candidate (or a blend of three) is the output.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{gaussian_blur, guided_filter, min_filter, Boundary};
use crate::histops::{clahe_rgb3, ClaheParams};
use crate::imgcore::{center_crop_roi_with, clamp_unit, luminance, median, ImageBuffer, Plane, RoiCrop, DEFAULT_ROI_THRESHOLD};

/// Lower bound on transmission; guards the division in radiance recovery.
pub const T_MIN: f64 = 0.01;

/// Per-pixel transmission clamped to `[t_min, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap {
    plane: Plane,
    t_min: f64,
}

impl TransmissionMap {
    /// Clamps `plane` into `[t_min, 1]`.
    pub fn from_plane(plane: &Plane, t_min: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_min <= 1.0) {
            return Err(Error::InvalidParameter(format!("t_min must be in (0, 1], got {t_min}")));
        }
        Ok(Self {
            plane: plane.map(|v| if v.is_nan() { t_min } else { v.clamp(t_min, 1.0) }),
            t_min,
        })
    }

    pub fn uniform(width: usize, height: usize, t: f64) -> Result<Self> {
        Self::from_plane(&Plane::filled(width, height, t), T_MIN)
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }
}

/// Which transmission map a candidate is recovered with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapVariant {
    /// `t(1 - I)`
    OfInverted,
    /// `t(I)`
    Of,
    /// `1 - t(I)`
    ComplementOf,
    /// `1 - t(1 - I)`
    ComplementOfInverted,
}

impl MapVariant {
    fn inverted_input(self) -> bool {
        matches!(self, MapVariant::OfInverted | MapVariant::ComplementOfInverted)
    }

    fn complemented(self) -> bool {
        matches!(self, MapVariant::ComplementOf | MapVariant::ComplementOfInverted)
    }
}

impl fmt::Display for MapVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapVariant::OfInverted => "t(1-I)",
            MapVariant::Of => "t(I)",
            MapVariant::ComplementOf => "1-t(I)",
            MapVariant::ComplementOfInverted => "1-t(1-I)",
        })
    }
}

/// One of the eight amplification methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmplifyMethod {
    pub letter: char,
    /// 0 brightens, 1 darkens.
    pub atmosphere: u8,
    pub variant: MapVariant,
    pub sharpen: bool,
}

impl AmplifyMethod {
    /// Fixed evaluation order; also the tie-break order.
    pub const ALL: [AmplifyMethod; 8] = [
        AmplifyMethod::new('A', 0, MapVariant::OfInverted),
        AmplifyMethod::new('B', 0, MapVariant::Of),
        AmplifyMethod::new('C', 0, MapVariant::ComplementOf),
        AmplifyMethod::new('D', 0, MapVariant::ComplementOfInverted),
        AmplifyMethod::new('W', 1, MapVariant::OfInverted),
        AmplifyMethod::new('X', 1, MapVariant::Of),
        AmplifyMethod::new('Y', 1, MapVariant::ComplementOf),
        AmplifyMethod::new('Z', 1, MapVariant::ComplementOfInverted),
    ];

    const fn new(letter: char, atmosphere: u8, variant: MapVariant) -> Self {
        Self {
            letter,
            atmosphere,
            variant,
            sharpen: false,
        }
    }

    pub fn brightening(&self) -> bool {
        self.atmosphere == 0
    }

    pub fn with_sharpen(mut self, sharpen: bool) -> Self {
        self.sharpen = sharpen;
        self
    }
}

impl fmt::Display for AmplifyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sharpen {
            write!(f, "s{}", self.letter)
        } else {
            write!(f, "{}", self.letter)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredResult {
    pub method: AmplifyMethod,
    pub image: ImageBuffer,
    /// `|median(luminance) - 0.5|`
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionParams {
    /// Odd window for the minimum filter.
    pub patch: usize,
    pub guided_radius: usize,
    pub guided_eps: f64,
    pub t_min: f64,
}

impl Default for TransmissionParams {
    fn default() -> Self {
        Self {
            patch: 5,
            guided_radius: 40,
            guided_eps: 1e-3,
            t_min: T_MIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcarMode {
    Single,
    #[default]
    Composite,
}

impl std::str::FromStr for PcarMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "single" => Ok(PcarMode::Single),
            "composite" => Ok(PcarMode::Composite),
            other => Err(format!("unknown pcar mode `{other}` (expected single|composite)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcarParams {
    pub mode: PcarMode,
    /// Runs the unsharp mask on every candidate (the `s`-prefixed letters).
    pub sharpen: bool,
    pub transmission: TransmissionParams,
    pub roi_threshold: f64,
}

impl Default for PcarParams {
    fn default() -> Self {
        Self {
            mode: PcarMode::Composite,
            sharpen: false,
            transmission: TransmissionParams::default(),
            roi_threshold: DEFAULT_ROI_THRESHOLD,
        }
    }
}

/// Per-pixel channel minimum followed by a `patch x patch` minimum filter.
pub fn dark_channel(img: &ImageBuffer, patch: usize) -> Result<ImageBuffer> {
    img.require_channels(3)?;
    if patch == 0 || patch.is_multiple_of(2) {
        return Err(Error::BadPatchSize(patch));
    }
    let mins = img
        .data()
        .chunks_exact(3)
        .map(|px| px[0].min(px[1]).min(px[2]))
        .collect();
    let plane = Plane::new(img.width(), img.height(), mins)?;
    Ok(min_filter(&plane, patch).to_image())
}

/// Luma plane affinely rescaled so its median is 0.5 while staying in `[0, 1]`.
///
/// A constant luma has no defined rescaling; the map is then constant 0.5.
pub fn depth_map(img: &ImageBuffer) -> Result<ImageBuffer> {
    let y = luminance(img)?;
    let m = y.median();
    let (lo, hi) = y
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let below = m - lo;
    let above = hi - m;
    let scale = match (below > 0.0, above > 0.0) {
        (true, true) => (0.5 / below).min(0.5 / above),
        (true, false) => 0.5 / below,
        (false, true) => 0.5 / above,
        (false, false) => return ImageBuffer::filled(img.width(), img.height(), &[0.5]),
    };
    Ok(y.map(|v| 0.5 + scale * (v - m)).to_image())
}

/// The variant's transmission before clamping: `t(X) = 1 - minfilter(X)`,
/// guided-filtered with the depth map as guide, then optionally complemented.
pub fn raw_transmission(depth: &ImageBuffer, variant: MapVariant, p: &TransmissionParams) -> Result<Plane> {
    depth.require_channels(1)?;
    if p.patch == 0 || p.patch.is_multiple_of(2) {
        return Err(Error::BadPatchSize(p.patch));
    }
    let guide = depth.plane(0);
    let input = if variant.inverted_input() {
        guide.map(|v| 1.0 - v)
    } else {
        guide.clone()
    };
    let t = min_filter(&input, p.patch).map(|v| 1.0 - v);
    let t = guided_filter(&guide, &t, p.guided_radius, p.guided_eps);
    Ok(if variant.complemented() { t.map(|v| 1.0 - v) } else { t })
}

pub fn solve_transmission(depth: &ImageBuffer, variant: MapVariant) -> Result<TransmissionMap> {
    solve_transmission_with(depth, variant, &TransmissionParams::default())
}

pub fn solve_transmission_with(depth: &ImageBuffer, variant: MapVariant, p: &TransmissionParams) -> Result<TransmissionMap> {
    TransmissionMap::from_plane(&raw_transmission(depth, variant, p)?, p.t_min)
}

/// Inverts the haze model: `J = (I - A (1 - t)) / t`, clamped to `[0, 1]`.
pub fn recover_radiance(img: &ImageBuffer, atmosphere: f64, t: &TransmissionMap) -> Result<ImageBuffer> {
    if img.dims() != t.dims() {
        return Err(Error::DimensionMismatch {
            left: img.dims(),
            right: t.dims(),
        });
    }
    let ch = img.channels();
    let tp = t.plane().data();
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = tp[i / ch];
            (v - atmosphere * (1.0 - t)) / t
        })
        .collect();
    ImageBuffer::from_clamped(img.width(), img.height(), ch, data)
}

pub const SHARPEN_AMOUNT: f64 = 1.0;
pub const SHARPEN_SIGMA: f64 = 1.5;

/// Unsharp mask with the default amount and radius.
pub fn sharpen(img: &ImageBuffer) -> ImageBuffer {
    sharpen_with(img, SHARPEN_AMOUNT, SHARPEN_SIGMA)
}

/// `img + amount * (img - gaussian(img, sigma))`, clamped.
pub fn sharpen_with(img: &ImageBuffer, amount: f64, sigma: f64) -> ImageBuffer {
    if amount == 0.0 {
        return img.clone();
    }
    let planes: Vec<Plane> = img
        .planes()
        .iter()
        .map(|p| {
            let blur = gaussian_blur(p, sigma, Boundary::Clamp);
            p.zip_map(&blur, |v, b| v + amount * (v - b))
        })
        .collect();
    ImageBuffer::from_planes(&planes).expect("planes share dims")
}

/// All eight scored candidates for one image, computed on its ROI crop.
#[derive(Debug, Clone)]
pub struct PcarEvaluation {
    pub crop: RoiCrop,
    pub depth: ImageBuffer,
    pub candidates: Vec<ScoredResult>,
}

fn score(img: &ImageBuffer) -> Result<f64> {
    Ok((median(luminance(img)?.data()) - 0.5).abs())
}

pub fn pcar_candidates(img: &ImageBuffer, p: &PcarParams) -> Result<PcarEvaluation> {
    img.require_channels(3)?;
    let crop = center_crop_roi_with(img, p.roi_threshold)?;
    let roi = &crop.image;
    let depth = depth_map(roi)?;
    let candidates = AmplifyMethod::ALL
        .par_iter()
        .map(|m| {
            let method = m.with_sharpen(p.sharpen);
            let t = solve_transmission_with(&depth, method.variant, &p.transmission)?;
            let mut image = recover_radiance(roi, f64::from(method.atmosphere), &t)?;
            if method.sharpen {
                image = sharpen(&image);
            }
            let score = score(&image)?;
            Ok(ScoredResult { method, image, score })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PcarEvaluation { crop, depth, candidates })
}

impl PcarEvaluation {
    /// Lowest score; ties go to the earliest letter.
    pub fn best(&self) -> &ScoredResult {
        let mut best = &self.candidates[0];
        for c in &self.candidates[1..] {
            if c.score < best.score {
                best = c;
            }
        }
        best
    }

    /// (lowest brightening, second-lowest brightening, highest darkening).
    pub fn composite_members(&self) -> [&ScoredResult; 3] {
        let mut bright: Vec<&ScoredResult> = self.candidates.iter().filter(|c| c.method.brightening()).collect();
        bright.sort_by(|a, b| a.score.total_cmp(&b.score));
        let mut dark = self.candidates.iter().filter(|c| !c.method.brightening());
        let first = dark.next().expect("four darkening candidates");
        let worst = dark.fold(first, |acc, c| if c.score > acc.score { c } else { acc });
        [bright[0], bright[1], worst]
    }

    /// ROI-sized output for `mode`.
    pub fn select(&self, mode: PcarMode) -> ImageBuffer {
        match mode {
            PcarMode::Single => self.best().image.clone(),
            PcarMode::Composite => {
                let [a, b, c] = self.composite_members();
                let data = a
                    .image
                    .data()
                    .iter()
                    .zip(b.image.data())
                    .zip(c.image.data())
                    .map(|((x, y), z)| clamp_unit((x + y + z) / 3.0))
                    .collect();
                ImageBuffer::new(a.image.width(), a.image.height(), 3, data).expect("same shape as members")
            }
        }
    }
}

/// PCAr with default parameters and the given mode.
pub fn pcar(img: &ImageBuffer, mode: PcarMode) -> Result<ImageBuffer> {
    pcar_with(img, &PcarParams { mode, ..PcarParams::default() })
}

/// Runs PCAr on the ROI and pastes the result back into the original frame.
pub fn pcar_with(img: &ImageBuffer, p: &PcarParams) -> Result<ImageBuffer> {
    let eval = pcar_candidates(img, p)?;
    eval.crop.reassemble(img, &eval.select(p.mode))
}

/// Composite PCAr followed by three-channel CLAHE (clip 2.0).
pub fn pcar_clahe(img: &ImageBuffer) -> Result<ImageBuffer> {
    pcar_clahe_with(img, &PcarParams::default(), &ClaheParams::default())
}

pub fn pcar_clahe_with(img: &ImageBuffer, p: &PcarParams, clahe: &ClaheParams) -> Result<ImageBuffer> {
    clahe_rgb3(&pcar_with(img, p)?, clahe)
}
