//! DPFRr restoration stage by stage on a vignetted, veiled phantom, with
//! the distance to the clean phantom after each stage.
//!
//!     cargo run --example dpfrr [OUT_DIR]

use std::path::PathBuf;

use fundus_prep::dpfr::{
    coarse_illumination, dpfrr_clahe, dpfrr_with_model, fine_illumination, scatter_suppression, DpfrParams,
};
use fundus_prep::imgcore::{save_image, ImageBuffer};
use fundus_prep::phantom::PhantomSpec;

fn l2(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn main() -> fundus_prep::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/example-output/dpfrr".into()));
    let ph = PhantomSpec {
        width: 256,
        height: 256,
        vignette: 0.5,
        veil: 0.25,
        glare: Some((0.3, 0.35, 0.12, 0.2)),
        noise: 0.01,
        ..PhantomSpec::default()
    }
    .build();

    for (label, p) in [("tuned", DpfrParams::default()), ("reference", DpfrParams::reference())] {
        let coarse = coarse_illumination(&ph.observed, &p)?.image;
        let fine = fine_illumination(&coarse, &p)?.image;
        let scatter = scatter_suppression(&fine, &p)?.image;
        println!("{label} parameters: {p:?}");
        println!("  observed  L2 to clean {:8.3}", l2(&ph.observed, &ph.clean));
        println!("  coarse    L2 to clean {:8.3}", l2(&coarse, &ph.clean));
        println!("  fine      L2 to clean {:8.3}", l2(&fine, &ph.clean));
        println!("  scatter   L2 to clean {:8.3}", l2(&scatter, &ph.clean));
        save_image(&scatter, out.join(format!("dpfrr_{label}.png")))?;
    }

    let result = dpfrr_with_model(&ph.observed, &DpfrParams::default())?;
    println!("reflection model residual {:.5}", result.model.residual());
    save_image(&ph.observed, out.join("observed.png"))?;
    save_image(&dpfrr_clahe(&ph.observed)?, out.join("dpfrr_clahe.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
