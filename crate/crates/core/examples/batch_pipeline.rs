//! Builds a small labelled dataset, processes it with one method, shows
//! resumption and the train/val pairing check, and writes a preview grid.
//!
//!     cargo run --example batch_pipeline [OUT_DIR]

use std::path::PathBuf;

use fundus_prep::imgcore::{load_image, save_image};
use fundus_prep::phantom::PhantomSpec;
use fundus_prep::pipeline::{
    preview_grid, run_batch, AugmentOp, BatchConfig, DatasetManifest, MethodId, Split, Task,
};

fn main() -> fundus_prep::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/example-output/batch".into()));
    let input = root.join("input");
    let mut rows = String::from("path,label,split,mask\n");
    for i in 0..8u64 {
        let ph = PhantomSpec {
            width: 160,
            height: 120,
            disc: true,
            vignette: 0.2 + 0.05 * i as f64,
            veil: 0.1,
            noise: 0.02,
            seed: i,
            ..PhantomSpec::default()
        }
        .build();
        save_image(&ph.observed, input.join(format!("eye{i}.png")))?;
        let split = if i < 6 { "train" } else { "val" };
        rows.push_str(&format!("eye{i}.png,{},{split},\n", i % 2));
    }
    let manifest_path = input.join("manifest.csv");
    std::fs::write(&manifest_path, rows)?;
    let manifest = DatasetManifest::load(&manifest_path, Task::Plus)?;

    let out = root.join("dpfrr_clahe");
    let cfg = BatchConfig {
        augment: vec![AugmentOp::HFlip, AugmentOp::Rot15],
        seed: 7,
        ..BatchConfig::new(MethodId::DpfrrClahe)
    };
    let report = run_batch(&manifest, &out, &cfg)?;
    println!("first run:  {} processed, {} files written", report.processed, report.written);
    let report = run_batch(&manifest, &out, &cfg)?;
    println!("second run: {} skipped", report.skipped);

    // A validation set made with a different method cannot pair with this training set.
    let val = DatasetManifest {
        entries: manifest.entries.iter().filter(|e| e.split == Split::Val).cloned().collect(),
        task: Task::Plus,
    };
    let mismatched = BatchConfig {
        paired_with: Some(out.clone()),
        ..BatchConfig::new(MethodId::Gray)
    };
    match run_batch(&val, root.join("val_gray"), &mismatched) {
        Err(e) => println!("rejected:   {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }

    let before: Vec<_> = (0..4).map(|i| load_image(input.join(format!("eye{i}.png")))).collect::<Result<_, _>>()?;
    let after: Vec<_> = manifest.entries[..4]
        .iter()
        .map(|e| load_image(out.join(e.split.as_str()).join(e.label.to_string()).join(format!("{}.png", e.stem()))))
        .collect::<Result<_, _>>()?;
    let grid = preview_grid(&before, &after, root.join("preview.png"))?;
    println!("preview:    {}x{} grid at {}", grid.width(), grid.height(), root.join("preview.png").display());
    Ok(())
}
