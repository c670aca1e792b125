//! Histogram equalization, CLAHE and CGH on a hazy vessel phantom, with
//! the vessel/background luminance gap before and after.
//!
//!     cargo run --example contrast [OUT_DIR]

use std::path::PathBuf;

use fundus_prep::histops::{cgh, clahe_rgb3, hist_equalize, ClaheParams};
use fundus_prep::imgcore::{luminance, save_image, to_grayscale, ImageBuffer};
use fundus_prep::phantom::PhantomSpec;
use fundus_prep::vessel_erosion::VesselMask;

fn gap(img: &ImageBuffer, mask: &VesselMask) -> f64 {
    let y = if img.channels() == 3 { luminance(img).unwrap() } else { img.plane(0) };
    let (mut bg, mut nb, mut vs, mut nv) = (0.0, 0, 0.0, 0);
    for (i, v) in y.data().iter().enumerate() {
        if mask.values()[i] > 0.1 {
            vs += v;
            nv += 1;
        } else {
            bg += v;
            nb += 1;
        }
    }
    bg / nb as f64 - vs / nv as f64
}

fn main() -> fundus_prep::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/example-output/contrast".into()));
    let ph = PhantomSpec {
        width: 256,
        height: 256,
        veil: 0.35,
        vignette: 0.3,
        noise: 0.02,
        ..PhantomSpec::default()
    }
    .build();
    let img = &ph.observed;

    let he = hist_equalize(&to_grayscale(img)?)?;
    let params = ClaheParams::default();
    let clahe = clahe_rgb3(img, &params)?;
    let strong = clahe_rgb3(img, &ClaheParams::new(4.0, (8, 8))?)?;
    let cgh_out = cgh(img, &params)?;

    println!("{:<18}{:>10}", "method", "gap");
    for (name, im) in [
        ("observed", img),
        ("he(gray)", &he),
        ("clahe 2.0", &clahe),
        ("clahe 4.0", &strong),
        ("cgh", &cgh_out),
    ] {
        println!("{name:<18}{:>10.4}", gap(im, &ph.vessel_mask));
        save_image(im, out.join(format!("{}.png", name.replace([' ', '(', ')', '.'], "_"))))?;
    }
    Ok(())
}
