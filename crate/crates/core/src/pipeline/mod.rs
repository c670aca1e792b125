//! Manifest-driven dataset generation: method dispatch, batch processing
//! with train/val pairing checks, augmentation and preview grids.

mod augment;
mod batch;
mod manifest;
mod method;
mod preview;

pub use augment::{augment, brightness, hflip, parse_ops, rotate, vflip, AugmentOp, MAX_BRIGHTNESS, MAX_ROTATION_DEG};
pub use batch::{
    entry_outputs, entry_seed, run_batch, BatchConfig, BatchReport, DatasetMeta, Failure, DEFAULT_SIZE, METHOD_FILE,
};
pub use manifest::{DatasetManifest, ManifestEntry, Split, Task};
pub use method::{apply_method, MethodId, MethodOptions};
pub use preview::{compose_grid, preview_grid, MAX_PREVIEW_PAIRS};
