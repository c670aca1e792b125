use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::augment::{augment, AugmentOp};
use super::manifest::{DatasetManifest, ManifestEntry, Task};
use super::method::{apply_method, MethodId, MethodOptions};
use crate::error::{Error, Result};
use crate::imgcore::{load_image, resize_lanczos, save_image, write_atomic};
use crate::vessel_erosion::load_mask;

pub const METHOD_FILE: &str = "method.json";
pub const DEFAULT_SIZE: (usize, usize) = (224, 224);

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub method: MethodId,
    /// Output `(width, height)`.
    pub size: (usize, usize),
    pub augment: Vec<AugmentOp>,
    pub seed: u64,
    /// Reprocess entries whose outputs already exist.
    pub force: bool,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    pub options: MethodOptions,
    /// Root of an existing dataset this run must match (e.g. the training
    /// set for a validation-only run).
    pub paired_with: Option<PathBuf>,
}

impl BatchConfig {
    pub fn new(method: MethodId) -> Self {
        Self {
            method,
            size: DEFAULT_SIZE,
            augment: Vec::new(),
            seed: 0,
            force: false,
            workers: None,
            options: MethodOptions::default(),
            paired_with: None,
        }
    }
}

/// Contents of `method.json` at a dataset root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub method: MethodId,
    pub task: Task,
    pub size: (usize, usize),
    pub augment: Vec<AugmentOp>,
    pub seed: u64,
}

impl DatasetMeta {
    pub fn read(root: impl AsRef<Path>) -> Result<Option<Self>> {
        let path = root.as_ref().join(METHOD_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_slice(&std::fs::read(path)?)?))
    }

    fn write(&self, root: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(&root.join(METHOD_FILE), &bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchReport {
    pub total: usize,
    /// Entries processed in this run.
    pub processed: usize,
    /// Entries whose outputs already existed.
    pub skipped: usize,
    /// Image files written, augmented copies included.
    pub written: usize,
    /// Sorted by input path.
    pub failures: Vec<Failure>,
}

impl BatchReport {
    pub fn succeeded(&self) -> usize {
        self.processed + self.skipped
    }

    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Output files for one entry: the processed image, then one per augmentation.
pub fn entry_outputs(out_dir: &Path, entry: &ManifestEntry, ops: &[AugmentOp]) -> Vec<PathBuf> {
    let dir = out_dir.join(entry.split.as_str()).join(entry.label.to_string());
    let stem = entry.stem();
    let mut out = vec![dir.join(format!("{stem}.png"))];
    for (i, op) in ops.iter().enumerate() {
        out.push(dir.join(format!("{stem}__aug{i}_{op}.png")));
    }
    out
}

/// Seed for one entry, derived from the run seed and the entry's output name
/// so results do not depend on scheduling or input location.
pub fn entry_seed(seed: u64, entry: &ManifestEntry) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(format!("{}/{}/{}", entry.split, entry.label, entry.stem()).as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn check_pairing(manifest: &DatasetManifest, out_dir: &Path, cfg: &BatchConfig) -> Result<()> {
    let violation = |recorded: MethodId| Error::PairingViolation {
        recorded: recorded.to_string(),
        requested: cfg.method.to_string(),
    };
    match &cfg.paired_with {
        Some(root) => {
            let meta = DatasetMeta::read(root)?.ok_or_else(|| {
                Error::ManifestInvalid(format!("{} has no {METHOD_FILE}", root.display()))
            })?;
            if meta.method != cfg.method {
                return Err(violation(meta.method));
            }
            if meta.task != manifest.task {
                return Err(Error::ManifestInvalid(format!(
                    "paired dataset is labelled for {}, manifest for {}",
                    meta.task, manifest.task
                )));
            }
        }
        None => manifest.require_both_splits()?,
    }
    if let Some(meta) = DatasetMeta::read(out_dir)? {
        if meta.method != cfg.method {
            return Err(violation(meta.method));
        }
    }
    Ok(())
}

fn process_entry(entry: &ManifestEntry, outputs: &[PathBuf], cfg: &BatchConfig) -> Result<usize> {
    let img = load_image(&entry.image_path)?;
    let mask = if cfg.method.needs_mask() {
        let path = entry.resolve_mask().ok_or_else(|| {
            Error::InvalidParameter(format!("no vessel mask for {}", entry.image_path.display()))
        })?;
        Some(load_mask(path, img.dims(), true)?)
    } else {
        None
    };
    let processed = apply_method(&img, cfg.method, mask.as_ref(), &cfg.options)?;
    let resized = resize_lanczos(&processed, cfg.size.0, cfg.size.1)?;
    let images = augment(&resized, &cfg.augment, entry_seed(cfg.seed, entry));
    for (img, path) in images.iter().zip(outputs) {
        save_image(img, path)?;
    }
    Ok(images.len())
}

enum Outcome {
    Done(usize),
    Skipped,
    Failed(Failure),
}

/// Applies `cfg.method` to every manifest entry and writes
/// `out_dir/<split>/<label>/<stem>.png`. Per-entry errors are collected in
/// the report; pairing and manifest problems abort before anything is written.
pub fn run_batch(manifest: &DatasetManifest, out_dir: impl AsRef<Path>, cfg: &BatchConfig) -> Result<BatchReport> {
    let out_dir = out_dir.as_ref();
    manifest.validate()?;
    if cfg.size.0 == 0 || cfg.size.1 == 0 {
        return Err(Error::ZeroDimension);
    }
    check_pairing(manifest, out_dir, cfg)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;

    std::fs::create_dir_all(out_dir)?;
    DatasetMeta {
        method: cfg.method,
        task: manifest.task,
        size: cfg.size,
        augment: cfg.augment.clone(),
        seed: cfg.seed,
    }
    .write(out_dir)?;

    let outcomes: Vec<Outcome> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let outputs = entry_outputs(out_dir, entry, &cfg.augment);
                if !cfg.force && outputs.iter().all(|p| p.is_file()) {
                    return Outcome::Skipped;
                }
                match process_entry(entry, &outputs, cfg) {
                    Ok(n) => Outcome::Done(n),
                    Err(e) => Outcome::Failed(Failure {
                        path: entry.image_path.clone(),
                        error: e.to_string(),
                    }),
                }
            })
            .collect()
    });

    let mut report = BatchReport {
        total: manifest.entries.len(),
        ..BatchReport::default()
    };
    for o in outcomes {
        match o {
            Outcome::Done(n) => {
                report.processed += 1;
                report.written += n;
            }
            Outcome::Skipped => report.skipped += 1,
            Outcome::Failed(f) => report.failures.push(f),
        }
    }
    report.failures.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(report)
}
