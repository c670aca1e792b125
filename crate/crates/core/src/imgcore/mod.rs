//! Image buffers, channel and color-space operations, resampling, ROI
//! cropping and file I/O shared by every enhancement method.

mod buffer;
mod color;
mod io;
mod resize;
mod roi;

pub use buffer::{median, ImageBuffer, Plane};
pub(crate) use buffer::clamp_unit;
pub use color::{
    convert_colorspace, extract_channel, luminance, merge_channels, to_grayscale, ColorSpace, GRAY_WEIGHTS,
};
pub use io::{encode_image, load_gray, load_image, save_image};
pub(crate) use io::write_atomic;
pub use resize::{resize_lanczos, LANCZOS_ORDER};
pub use roi::{center_crop_roi, center_crop_roi_with, RoiCrop, DEFAULT_ROI_THRESHOLD, MIN_ROI_INPUT};
