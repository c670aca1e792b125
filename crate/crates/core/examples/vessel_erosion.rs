//! Mask-guided vessel erosion: vessels are filled from their surroundings
//! while every other pixel stays bit-identical.
//!
//!     cargo run --example vessel_erosion [IMAGE MASK] [OUT_DIR]

use std::path::PathBuf;

use fundus_prep::imgcore::{load_image, save_image};
use fundus_prep::phantom::PhantomSpec;
use fundus_prep::vessel_erosion::{clean_image, load_mask, ErosionKernel, ErosionParams};

fn main() -> fundus_prep::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (img, mask, out) = if args.len() >= 2 {
        let img = load_image(&args[0])?;
        let mask = load_mask(&args[1], img.dims(), true)?;
        (img, mask, args.get(2).cloned())
    } else {
        let ph = PhantomSpec {
            width: 200,
            height: 200,
            noise: 0.03,
            ..PhantomSpec::default()
        }
        .build();
        (ph.observed, ph.vessel_mask, args.first().cloned())
    };
    let out = PathBuf::from(out.unwrap_or_else(|| "target/example-output/erosion".into()));

    println!("{} vessel pixels of {}", mask.vessel_count(), img.pixel_count());
    for kernel in [ErosionKernel::Average, ErosionKernel::Gaussian] {
        let p = ErosionParams {
            kernel,
            ..ErosionParams::default()
        };
        let cleaned = clean_image(&img, &mask, &p)?;
        let changed = (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| cleaned.pixel(x, y) != img.pixel(x, y))
            .count();
        let outside = (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| !mask.is_vessel(x, y) && cleaned.pixel(x, y) != img.pixel(x, y))
            .count();
        println!("{kernel:?}: scales {:?}, {changed} pixels changed, {outside} outside the mask", p.scales());
        save_image(&cleaned, out.join(format!("eroded_{kernel:?}.png").to_lowercase()))?;
    }
    save_image(&img, out.join("input.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
