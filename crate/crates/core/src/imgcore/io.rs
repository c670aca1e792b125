use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use super::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Reads a PNG or JPEG file as an RGB image.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let rgb = open(path.as_ref())?.to_rgb8();
    let (w, h) = rgb.dimensions();
    ImageBuffer::from_u8(w as usize, h as usize, 3, rgb.as_raw())
}

/// Reads any supported file as a single 8-bit luma plane.
pub fn load_gray(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let luma = open(path.as_ref())?.to_luma8();
    let (w, h) = luma.dimensions();
    ImageBuffer::from_u8(w as usize, h as usize, 1, luma.as_raw())
}

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let reader = ImageReader::open(path)?
        .with_guessed_format()
        .map_err(|e| Error::CorruptImage(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
        None => return Err(Error::UnsupportedFormat(path.display().to_string())),
    }
    reader.decode().map_err(|e| Error::CorruptImage(e.to_string()))
}

/// Encodes to PNG (or JPEG for `.jpg`/`.jpeg` paths). Gray images are
/// written as single-channel files.
pub fn encode_image(img: &ImageBuffer, format: ImageFormat) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes = img.to_u8();
    let dynamic = if img.channels() == 1 {
        DynamicImage::ImageLuma8(
            image::GrayImage::from_raw(w, h, bytes).expect("buffer length matches dimensions"),
        )
    } else {
        DynamicImage::ImageRgb8(
            image::RgbImage::from_raw(w, h, bytes).expect("buffer length matches dimensions"),
        )
    };
    let mut out = std::io::Cursor::new(Vec::new());
    dynamic
        .write_to(&mut out, format)
        .map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    Ok(out.into_inner())
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => Ok(ImageFormat::Png),
        Some("jpg") | Some("jpeg") => Ok(ImageFormat::Jpeg),
        _ => Err(Error::UnsupportedFormat(path.display().to_string())),
    }
}

/// Writes the image atomically: encode to a sibling temp file, then rename.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_image(img, format_for(path)?)?;
    write_atomic(path, &bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
