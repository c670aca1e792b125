//! Retinal fundus image pre-processing.
//!
//! Traditional contrast methods (grayscale, CLAHE, CGH), restoration
//! methods (PCAr pixel color amplification, DPFRr reflection restoration
//! and their CLAHE hybrids), mask-guided vessel erosion, the metric
//! arithmetic used to compare methods, and a manifest-driven batch runner
//! that produces paired train/validation datasets.
//!
//! All images are [`ImageBuffer`]s holding `f64` intensities in `[0, 1]`;
//! 8-bit quantization happens only when reading and writing files.
//!
//! ```
//! use fundus_prep::{clahe_rgb3, dpfrr, ClaheParams, ImageBuffer};
//!
//! let img = ImageBuffer::from_fn(64, 64, 3, |x, y, c| 0.2 + 0.01 * ((x + y + c) % 40) as f64)?;
//! let restored = dpfrr(&img)?;
//! let enhanced = clahe_rgb3(&restored, &ClaheParams::default())?;
//! assert_eq!(enhanced.dims(), (64, 64));
//! # Ok::<(), fundus_prep::Error>(())
//! ```

pub mod dpfr;
pub mod error;
pub mod eval_metrics;
pub mod filter;
pub mod histops;
pub mod imgcore;
pub mod pca_amp;
pub mod phantom;
pub mod pipeline;
pub mod vessel_erosion;

pub use dpfr::{dpfrr, dpfrr_clahe, dpfrr_clahe_with, dpfrr_with, DpfrParams};
pub use error::{Error, Result};
pub use eval_metrics::{build_cm, metrics, report_csv, report_table, ConfusionMatrix, MetricReport};
pub use filter::Boundary;
pub use histops::{cgh, clahe_channel, clahe_rgb3, hist_equalize, ClaheParams};
pub use imgcore::{
    center_crop_roi, convert_colorspace, extract_channel, load_image, merge_channels, resize_lanczos, save_image,
    to_grayscale, ColorSpace, ImageBuffer, Plane,
};
pub use pca_amp::{pcar, pcar_clahe, pcar_with, recover_radiance, PcarMode, PcarParams, TransmissionMap};
pub use pipeline::{apply_method, run_batch, BatchConfig, BatchReport, DatasetManifest, MethodId, MethodOptions, Task};
pub use vessel_erosion::{clean_image, ErosionParams, VesselMask};
