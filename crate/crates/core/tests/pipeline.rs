use std::path::{Path, PathBuf};

use fundus_prep::imgcore::{load_image, save_image, ImageBuffer};
use fundus_prep::phantom::PhantomSpec;
use fundus_prep::pipeline::{run_batch, BatchConfig, DatasetManifest, DatasetMeta, MethodId, Split, Task};
use fundus_prep::Error;

fn write_inputs(dir: &Path, n: usize) -> PathBuf {
    let mut rows = String::from("path,label,split,mask\n");
    for i in 0..n {
        let ph = PhantomSpec {
            width: 72,
            height: 64,
            disc: true,
            vignette: 0.3,
            seed: i as u64,
            ..PhantomSpec::default()
        }
        .build();
        let name = format!("f{i:02}.png");
        save_image(&ph.observed, dir.join(&name)).unwrap();
        let mask = ImageBuffer::from_fn(72, 64, 1, |x, y, _| ph.vessel_mask.get(x, y)).unwrap();
        save_image(&mask, dir.join(format!("f{i:02}.mask.png"))).unwrap();
        let split = if i % 3 == 2 { "val" } else { "train" };
        rows.push_str(&format!("{name},{},{split},\n", i % 2));
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, rows).unwrap();
    path
}

fn count_pngs(root: &Path) -> usize {
    let mut n = 0;
    for split in ["train", "val"] {
        let Ok(labels) = std::fs::read_dir(root.join(split)) else { continue };
        for label in labels {
            n += std::fs::read_dir(label.unwrap().path()).unwrap().count();
        }
    }
    n
}

#[test]
fn base_run_resizes_every_image() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = DatasetManifest::load(write_inputs(tmp.path(), 10), Task::Plus).unwrap();
    let out = tmp.path().join("out");
    let report = run_batch(&manifest, &out, &BatchConfig::new(MethodId::Base)).unwrap();
    assert_eq!((report.processed, report.failures.len()), (10, 0));
    assert_eq!(count_pngs(&out), 10);
    let img = load_image(out.join("train/0/f00.png")).unwrap();
    assert_eq!(img.dims(), (224, 224));
    let meta = DatasetMeta::read(&out).unwrap().unwrap();
    assert_eq!((meta.method, meta.task, meta.size), (MethodId::Base, Task::Plus, (224, 224)));
}

#[test]
fn layout_round_trips_to_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = DatasetManifest::load(write_inputs(tmp.path(), 7), Task::Plus).unwrap();
    let out = tmp.path().join("out");
    let cfg = BatchConfig {
        size: (32, 32),
        ..BatchConfig::new(MethodId::Gray)
    };
    run_batch(&manifest, &out, &cfg).unwrap();
    let rebuilt = DatasetManifest::from_output_tree(&out, Task::Plus).unwrap();
    let key = |m: &DatasetManifest| {
        let mut v: Vec<(String, usize, Split)> = m.entries.iter().map(|e| (e.stem(), e.label, e.split)).collect();
        v.sort();
        v
    };
    assert_eq!(key(&rebuilt), key(&manifest));
    assert_eq!(load_image(&rebuilt.entries[0].image_path).unwrap().dims(), (32, 32));
}

#[test]
fn missing_file_is_collected_and_others_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_inputs(tmp.path(), 5);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("absent.png,1,val,\n");
    std::fs::write(&path, text).unwrap();
    let manifest = DatasetManifest::load(&path, Task::Plus).unwrap();
    let out = tmp.path().join("out");
    let cfg = BatchConfig {
        size: (40, 40),
        ..BatchConfig::new(MethodId::Clahe)
    };
    let report = run_batch(&manifest, &out, &cfg).unwrap();
    assert_eq!(report.failures.len(), 1);
    assert!(report.failures[0].path.ends_with("absent.png"));
    assert_eq!(count_pngs(&out), report.total - report.failures.len());
    assert!(!report.is_success());
}

#[test]
fn existing_outputs_are_skipped_unless_forced() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = DatasetManifest::load(write_inputs(tmp.path(), 4), Task::Plus).unwrap();
    let out = tmp.path().join("out");
    let cfg = BatchConfig {
        size: (32, 32),
        ..BatchConfig::new(MethodId::Base)
    };
    assert_eq!(run_batch(&manifest, &out, &cfg).unwrap().processed, 4);
    let again = run_batch(&manifest, &out, &cfg).unwrap();
    assert_eq!((again.processed, again.skipped), (0, 4));
    let forced = run_batch(&manifest, &out, &BatchConfig { force: true, ..cfg }).unwrap();
    assert_eq!((forced.processed, forced.skipped), (4, 0));
}

#[test]
fn erosion_discovers_sibling_masks() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = DatasetManifest::load(write_inputs(tmp.path(), 3), Task::Plus).unwrap();
    let out = tmp.path().join("out");
    let cfg = BatchConfig {
        size: (64, 64),
        ..BatchConfig::new(MethodId::Erode)
    };
    let report = run_batch(&manifest, &out, &cfg).unwrap();
    assert!(report.is_success(), "{:?}", report.failures);
}

#[test]
fn pairing_rules() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = DatasetManifest::load(write_inputs(tmp.path(), 6), Task::Plus).unwrap();
    let train_only = DatasetManifest {
        entries: manifest.entries.iter().filter(|e| e.split == Split::Train).cloned().collect(),
        task: Task::Plus,
    };
    // An unpaired run must carry both splits.
    assert!(matches!(
        run_batch(&train_only, tmp.path().join("x"), &BatchConfig::new(MethodId::Base)),
        Err(Error::ManifestInvalid(_))
    ));

    let full = tmp.path().join("full");
    let cfg = BatchConfig {
        size: (32, 32),
        ..BatchConfig::new(MethodId::Cgh)
    };
    run_batch(&manifest, &full, &cfg).unwrap();

    let val_only = DatasetManifest {
        entries: manifest.entries.iter().filter(|e| e.split == Split::Val).cloned().collect(),
        task: Task::Plus,
    };
    let paired = BatchConfig {
        paired_with: Some(full.clone()),
        ..cfg.clone()
    };
    let report = run_batch(&val_only, tmp.path().join("val"), &paired).unwrap();
    assert!(report.is_success());

    let wrong_task = DatasetManifest {
        task: Task::Zones,
        ..val_only.clone()
    };
    assert!(matches!(
        run_batch(&wrong_task, tmp.path().join("val2"), &paired),
        Err(Error::ManifestInvalid(_))
    ));
    let other = BatchConfig {
        method: MethodId::Pcar,
        ..paired
    };
    match run_batch(&val_only, tmp.path().join("val3"), &other) {
        Err(Error::PairingViolation { recorded, requested }) => {
            assert_eq!((recorded.as_str(), requested.as_str()), ("cgh", "pcar"));
        }
        other => panic!("expected PairingViolation, got {other:?}"),
    }
    assert!(!tmp.path().join("val3").exists());
}

#[test]
fn manifest_errors_are_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("m.csv");
    std::fs::write(&path, "path,label,split,mask\na.png,3,train,\n").unwrap();
    assert!(matches!(DatasetManifest::load(&path, Task::Zones), Err(Error::ManifestInvalid(_))));
}
