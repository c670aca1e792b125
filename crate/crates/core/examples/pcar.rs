//! PCAr: the eight amplification candidates, their scores, and the single
//! and composite selections.
//!
//!     cargo run --example pcar [IMAGE] [OUT_DIR]

use std::path::PathBuf;

use fundus_prep::imgcore::{load_image, save_image};
use fundus_prep::pca_amp::{pcar_candidates, pcar_clahe, PcarMode, PcarParams};
use fundus_prep::phantom::PhantomSpec;

fn main() -> fundus_prep::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => load_image(path)?,
        None => PhantomSpec {
            width: 256,
            height: 256,
            disc: true,
            vignette: 0.8,
            ..PhantomSpec::default()
        }
        .build()
        .observed,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/example-output/pcar".into()));

    let eval = pcar_candidates(&img, &PcarParams::default())?;
    println!("{:<4}{:<12}{:>8}", "", "map", "score");
    for c in &eval.candidates {
        let kind = if c.method.brightening() { "brighten" } else { "darken" };
        println!("{:<4}{:<12}{:>8.4}  {kind}", c.method.to_string(), c.method.variant.to_string(), c.score);
        save_image(&c.image, out.join(format!("candidate_{}.png", c.method)))?;
    }
    let [a, b, c] = eval.composite_members();
    println!("best single: {}", eval.best().method);
    println!("composite:   {} + {} + {}", a.method, b.method, c.method);

    for (name, mode) in [("single", PcarMode::Single), ("composite", PcarMode::Composite)] {
        let img = eval.crop.reassemble(&img, &eval.select(mode))?;
        save_image(&img, out.join(format!("pcar_{name}.png")))?;
    }
    save_image(&pcar_clahe(&img)?, out.join("pcar_clahe.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
