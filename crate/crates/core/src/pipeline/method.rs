use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dpfr::{dpfrr_clahe_with, dpfrr_with, DpfrParams};
use crate::error::{Error, Result};
use crate::histops::{cgh, clahe_rgb3, ClaheParams};
use crate::imgcore::{to_grayscale, ImageBuffer};
use crate::pca_amp::{pcar_clahe_with, pcar_with, PcarParams};
use crate::vessel_erosion::{clean_image, ErosionParams, VesselMask};

/// The pre-processing methods a dataset can be generated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Base,
    Gray,
    Clahe,
    Cgh,
    Pcar,
    PcarClahe,
    Dpfrr,
    DpfrrClahe,
    Erode,
    ErodeDpfrrClahe,
}

impl MethodId {
    pub const ALL: [MethodId; 10] = [
        MethodId::Base,
        MethodId::Gray,
        MethodId::Clahe,
        MethodId::Cgh,
        MethodId::Pcar,
        MethodId::PcarClahe,
        MethodId::Dpfrr,
        MethodId::DpfrrClahe,
        MethodId::Erode,
        MethodId::ErodeDpfrrClahe,
    ];

    /// The eight methods compared in the result tables.
    pub const COMPARISON: [MethodId; 8] = [
        MethodId::Base,
        MethodId::Gray,
        MethodId::Clahe,
        MethodId::Cgh,
        MethodId::Dpfrr,
        MethodId::DpfrrClahe,
        MethodId::Pcar,
        MethodId::PcarClahe,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MethodId::Base => "base",
            MethodId::Gray => "gray",
            MethodId::Clahe => "clahe",
            MethodId::Cgh => "cgh",
            MethodId::Pcar => "pcar",
            MethodId::PcarClahe => "pcar_clahe",
            MethodId::Dpfrr => "dpfrr",
            MethodId::DpfrrClahe => "dpfrr_clahe",
            MethodId::Erode => "erode",
            MethodId::ErodeDpfrrClahe => "erode_dpfrr_clahe",
        }
    }

    /// Erosion variants were not part of the comparison tables.
    pub fn is_experimental(self) -> bool {
        matches!(self, MethodId::Erode | MethodId::ErodeDpfrrClahe)
    }

    pub fn needs_mask(self) -> bool {
        self.is_experimental()
    }

    /// Channel count of the method's output.
    pub fn output_channels(self) -> usize {
        match self {
            MethodId::Gray | MethodId::Cgh => 1,
            _ => 3,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MethodId {
    type Err = String;

    /// Accepts `-` or `_` as separators, case-insensitively.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        MethodId::ALL
            .into_iter()
            .find(|m| m.tag() == norm)
            .ok_or_else(|| {
                let tags: Vec<&str> = MethodId::ALL.iter().map(|m| m.tag()).collect();
                format!("unknown method `{s}` (expected one of {})", tags.join(", "))
            })
    }
}

/// Tunables for every method; each method reads only its own section.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodOptions {
    pub clahe: ClaheParams,
    pub pcar: PcarParams,
    pub dpfr: DpfrParams,
    pub erosion: ErosionParams,
}

impl MethodOptions {
    /// Sets the ROI border threshold used by both restoration methods.
    pub fn with_roi_threshold(mut self, threshold: f64) -> Self {
        self.pcar.roi_threshold = threshold;
        self.dpfr.roi_threshold = threshold;
        self
    }
}

/// Runs `method` on an RGB image at its native resolution.
pub fn apply_method(
    img: &ImageBuffer,
    method: MethodId,
    mask: Option<&VesselMask>,
    opts: &MethodOptions,
) -> Result<ImageBuffer> {
    img.require_channels(3)?;
    let need_mask = || {
        mask.ok_or_else(|| Error::InvalidParameter(format!("method {method} requires a vessel mask")))
    };
    match method {
        MethodId::Base => Ok(img.clone()),
        MethodId::Gray => to_grayscale(img),
        MethodId::Clahe => clahe_rgb3(img, &opts.clahe),
        MethodId::Cgh => cgh(img, &opts.clahe),
        MethodId::Pcar => pcar_with(img, &opts.pcar),
        MethodId::PcarClahe => pcar_clahe_with(img, &opts.pcar, &opts.clahe),
        MethodId::Dpfrr => dpfrr_with(img, &opts.dpfr),
        MethodId::DpfrrClahe => dpfrr_clahe_with(img, &opts.dpfr, &opts.clahe),
        MethodId::Erode => clean_image(img, need_mask()?, &opts.erosion),
        MethodId::ErodeDpfrrClahe => {
            let eroded = clean_image(img, need_mask()?, &opts.erosion)?;
            dpfrr_clahe_with(&eroded, &opts.dpfr, &opts.clahe)
        }
    }
}
