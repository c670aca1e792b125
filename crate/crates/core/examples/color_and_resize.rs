//! Grayscale conversion, channel split/merge, YCrCb round trip, ROI crop
//! and Lanczos resizing.
//!
//!     cargo run --example color_and_resize [IMAGE] [OUT_DIR]

use std::path::PathBuf;

use fundus_prep::imgcore::{
    center_crop_roi, convert_colorspace, extract_channel, load_image, merge_channels, resize_lanczos, save_image,
    to_grayscale, ColorSpace,
};
use fundus_prep::phantom::PhantomSpec;

fn main() -> fundus_prep::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => load_image(path)?,
        None => PhantomSpec {
            width: 320,
            height: 240,
            disc: true,
            vignette: 0.4,
            ..PhantomSpec::default()
        }
        .build()
        .observed,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/example-output/color".into()));

    let gray = to_grayscale(&img)?;
    let green = extract_channel(&img, 1)?;
    let remerged = merge_channels(&extract_channel(&img, 0)?, &green, &extract_channel(&img, 2)?)?;
    assert_eq!(remerged, img);

    let ycc = convert_colorspace(&img, ColorSpace::Rgb, ColorSpace::YCrCb)?;
    let back = convert_colorspace(&ycc, ColorSpace::YCrCb, ColorSpace::Rgb)?;
    let drift = img.data().iter().zip(back.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let crop = center_crop_roi(&img)?;
    let small = resize_lanczos(&crop.image, 224, 224)?;

    println!("input            {}x{}", img.width(), img.height());
    println!("ROI              {}x{} at ({}, {})", crop.image.width(), crop.image.height(), crop.x, crop.y);
    println!("YCrCb round trip max drift {:.5} ({:.2} levels)", drift, drift * 255.0);

    save_image(&gray, out.join("gray.png"))?;
    save_image(&green, out.join("green.png"))?;
    save_image(&small, out.join("roi_224.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
