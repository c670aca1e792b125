use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification task a dataset is labelled for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Plus,
    Stages,
    Zones,
}

impl Task {
    pub fn classes(self) -> usize {
        match self {
            Task::Plus => 2,
            Task::Stages => 4,
            Task::Zones => 3,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Plus => "plus",
            Task::Stages => "stages",
            Task::Zones => "zones",
        })
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plus" => Ok(Task::Plus),
            "stages" | "stage" => Ok(Task::Stages),
            "zones" | "zone" => Ok(Task::Zones),
            other => Err(format!("unknown task `{other}` (expected plus|stages|zones)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_path: PathBuf,
    pub label: usize,
    pub split: Split,
    pub mask_path: Option<PathBuf>,
}

impl ManifestEntry {
    /// File stem used for the processed output.
    pub fn stem(&self) -> String {
        self.image_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    /// The explicit mask, or `<stem>.mask.png` next to the image when present.
    pub fn resolve_mask(&self) -> Option<PathBuf> {
        if let Some(m) = &self.mask_path {
            return Some(m.clone());
        }
        let guess = self.image_path.with_file_name(format!("{}.mask.png", self.stem()));
        guess.is_file().then_some(guess)
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    path: String,
    label: String,
    split: String,
    #[serde(default)]
    mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub task: Task,
}

impl DatasetManifest {
    /// Reads a `path,label,split,mask` CSV. Relative paths resolve against
    /// the manifest's directory.
    pub fn load(path: impl AsRef<Path>, task: Task) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, base, task)
    }

    pub fn parse(text: &str, base: &Path, task: Task) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::ManifestInvalid(format!("line {line}: {e}")))?;
            let label: usize = row
                .label
                .parse()
                .map_err(|_| Error::ManifestInvalid(format!("line {line}: label `{}` is not a class id", row.label)))?;
            let split = match row.split.to_ascii_lowercase().as_str() {
                "train" => Split::Train,
                "val" | "validation" => Split::Val,
                other => return Err(Error::ManifestInvalid(format!("line {line}: unknown split `{other}`"))),
            };
            if row.path.is_empty() {
                return Err(Error::ManifestInvalid(format!("line {line}: empty path")));
            }
            let resolve = |p: &str| {
                let p = Path::new(p);
                if p.is_absolute() {
                    p.to_path_buf()
                } else {
                    base.join(p)
                }
            };
            entries.push(ManifestEntry {
                image_path: resolve(&row.path),
                label,
                split,
                mask_path: row.mask.filter(|m| !m.is_empty()).map(|m| resolve(&m)),
            });
        }
        let manifest = Self { entries, task };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Labels in range, at least one entry, and no two entries mapping to
    /// the same output file.
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::ManifestInvalid("manifest has no entries".into()));
        }
        let k = self.task.classes();
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.label >= k {
                return Err(Error::ManifestInvalid(format!(
                    "{}: label {} out of range for task {} ({k} classes)",
                    e.image_path.display(),
                    e.label,
                    self.task
                )));
            }
            if !seen.insert((e.split, e.label, e.stem())) {
                return Err(Error::ManifestInvalid(format!(
                    "duplicate output name {}/{}/{}",
                    e.split,
                    e.label,
                    e.stem()
                )));
            }
        }
        Ok(())
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == split).count()
    }

    /// Training runs need both splits populated.
    pub fn require_both_splits(&self) -> Result<()> {
        for split in [Split::Train, Split::Val] {
            if self.count(split) == 0 {
                return Err(Error::ManifestInvalid(format!("{split} split is empty")));
            }
        }
        Ok(())
    }

    /// Rebuilds a manifest from a processed tree laid out as `<split>/<label>/<file>.png`.
    pub fn from_output_tree(root: impl AsRef<Path>, task: Task) -> Result<Self> {
        let root = root.as_ref();
        let mut entries = Vec::new();
        for split in [Split::Train, Split::Val] {
            let split_dir = root.join(split.as_str());
            if !split_dir.is_dir() {
                continue;
            }
            for label_dir in sorted_dir(&split_dir)? {
                let Some(label) = label_dir.file_name().and_then(|n| n.to_str()).and_then(|n| n.parse().ok()) else {
                    continue;
                };
                for file in sorted_dir(&label_dir)? {
                    if file.extension().is_some_and(|x| x == "png") {
                        entries.push(ManifestEntry {
                            image_path: file,
                            label,
                            split,
                            mask_path: None,
                        });
                    }
                }
            }
        }
        let manifest = Self { entries, task };
        manifest.validate()?;
        Ok(manifest)
    }
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    out.sort();
    Ok(out)
}
