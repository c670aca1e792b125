use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fundus_prep::eval_metrics::{build_cm, class_table, metrics, report_csv};
use fundus_prep::imgcore::{load_image, resize_lanczos};
use fundus_prep::pca_amp::PcarMode;
use fundus_prep::pipeline::{
    apply_method, parse_ops, preview_grid, run_batch, BatchConfig, DatasetManifest, MethodId, MethodOptions, Task,
};
use fundus_prep::vessel_erosion::{load_mask, ErosionKernel};
use fundus_prep::{Boundary, ClaheParams, Error};

#[derive(Parser)]
#[command(name = "fundus-prep", version, about = "Retinal fundus image pre-processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Process every image in a manifest into <out>/<split>/<label>/
    Run(RunArgs),
    /// Write a before/after comparison grid for up to 8 images
    Preview(PreviewArgs),
    /// Confusion matrix and per-class metrics from a predictions CSV
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct MethodArgs {
    /// CLAHE clip limit (multiple of the mean bin count)
    #[arg(long, default_value_t = 2.0)]
    clip_limit: f64,
    /// CLAHE tile grid as ROWSxCOLS
    #[arg(long, default_value = "8x8", value_parser = parse_grid)]
    tile_grid: (usize, usize),
    /// PCAr output: best single candidate or three-way composite
    #[arg(long, default_value = "composite")]
    mode: PcarMode,
    /// Unsharp-mask every PCAr candidate
    #[arg(long)]
    sharpen: bool,
    /// DPFRr coarse illumination guided-filter regularizer
    #[arg(long)]
    eps_coarse: Option<f64>,
    /// DPFRr fine-stage dehazing estimate
    #[arg(long)]
    dehaze_fine: Option<f64>,
    /// DPFRr backscatter suppression strength
    #[arg(long)]
    scatter: Option<f64>,
    /// Vessel erosion border handling
    #[arg(long, default_value = "wrap")]
    boundary: Boundary,
    /// Vessel erosion kernel
    #[arg(long, default_value = "average")]
    kernel: ErosionKernel,
    /// Vessel erosion starting patch size (4, 8, 16, 32 or 64)
    #[arg(long, default_value_t = 32)]
    start_patch: usize,
    /// Pixels with every channel below this are treated as black border
    #[arg(long, default_value_t = fundus_prep::imgcore::DEFAULT_ROI_THRESHOLD)]
    roi_threshold: f64,
}

impl MethodArgs {
    fn options(&self) -> Result<MethodOptions, Error> {
        let mut o = MethodOptions::default().with_roi_threshold(self.roi_threshold);
        o.clahe = ClaheParams::new(self.clip_limit, self.tile_grid)?;
        o.pcar.mode = self.mode;
        o.pcar.sharpen = self.sharpen;
        if let Some(v) = self.eps_coarse {
            o.dpfr.eps_coarse = v;
        }
        if let Some(v) = self.dehaze_fine {
            o.dpfr.dehaze_fine = v;
        }
        if let Some(v) = self.scatter {
            o.dpfr.scatter_strength = v;
        }
        o.erosion.boundary = self.boundary;
        o.erosion.kernel = self.kernel;
        o.erosion.start_patch = self.start_patch;
        o.erosion.validate()?;
        Ok(o)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// base, gray, clahe, cgh, pcar, pcar-clahe, dpfrr, dpfrr-clahe, erode, erode-dpfrr-clahe
    #[arg(long)]
    method: MethodId,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "plus")]
    task: Task,
    /// Output size: N for NxN, or WxH
    #[arg(long, default_value = "224", value_parser = parse_size)]
    size: (usize, usize),
    /// Comma-separated: hflip, vflip, rot15, brightness
    #[arg(long, default_value = "")]
    augment: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reprocess images whose outputs already exist
    #[arg(long)]
    force: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Dataset root whose method.json this run must match
    #[arg(long)]
    paired_with: Option<PathBuf>,
    #[command(flatten)]
    method_args: MethodArgs,
}

#[derive(Args)]
struct PreviewArgs {
    #[arg(long, required = true, num_args = 1..=8)]
    input: Vec<PathBuf>,
    #[arg(long)]
    method: MethodId,
    #[arg(long)]
    out: PathBuf,
    /// Resize every cell to N or WxH first
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
    #[command(flatten)]
    method_args: MethodArgs,
}

#[derive(Args)]
struct MetricsArgs {
    /// CSV with columns path,predicted and optionally true
    #[arg(long)]
    pred: PathBuf,
    /// CSV with columns path,label; overrides any true column in --pred
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Class count; defaults to the largest id seen plus one
    #[arg(long)]
    classes: Option<usize>,
    /// Method label for CSV output
    #[arg(long, default_value = "base")]
    method: MethodId,
    /// Also write the per-class CSV table here
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got `{s}`"))?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad number `{a}`"))?,
        b.trim().parse().map_err(|_| format!("bad number `{b}`"))?,
    ))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    if s.contains(['x', 'X']) {
        parse_grid(s)
    } else {
        let n = s.trim().parse().map_err(|_| format!("bad size `{s}`"))?;
        Ok((n, n))
    }
}

fn run(args: RunArgs) -> Result<bool, Error> {
    let manifest = DatasetManifest::load(&args.manifest, args.task)?;
    let cfg = BatchConfig {
        method: args.method,
        size: args.size,
        augment: parse_ops(&args.augment).map_err(Error::InvalidParameter)?,
        seed: args.seed,
        force: args.force,
        workers: args.workers,
        options: args.method_args.options()?,
        paired_with: args.paired_with,
    };
    if cfg.method.is_experimental() {
        eprintln!("note: {} is experimental", cfg.method);
    }
    let report = run_batch(&manifest, &args.out, &cfg)?;
    println!(
        "{} entries: {} processed, {} skipped, {} failed ({} files written)",
        report.total,
        report.processed,
        report.skipped,
        report.failures.len(),
        report.written
    );
    for f in &report.failures {
        eprintln!("failed: {}: {}", f.path.display(), f.error);
    }
    Ok(report.is_success())
}

fn preview(args: PreviewArgs) -> Result<bool, Error> {
    let opts = args.method_args.options()?;
    let mut before = Vec::new();
    let mut after = Vec::new();
    for path in &args.input {
        let img = load_image(path)?;
        let mask = if args.method.needs_mask() {
            let mask_path = path.with_file_name(format!(
                "{}.mask.png",
                path.file_stem().unwrap_or_default().to_string_lossy()
            ));
            Some(load_mask(mask_path, img.dims(), true)?)
        } else {
            None
        };
        let out = apply_method(&img, args.method, mask.as_ref(), &opts)?;
        match args.size {
            Some((w, h)) => {
                before.push(resize_lanczos(&img, w, h)?);
                after.push(resize_lanczos(&out, w, h)?);
            }
            None => {
                before.push(img);
                after.push(out);
            }
        }
    }
    let grid = preview_grid(&before, &after, &args.out)?;
    println!("wrote {} ({}x{})", args.out.display(), grid.width(), grid.height());
    Ok(true)
}

fn read_pairs(path: &Path, value_column: &str) -> Result<Vec<(String, usize)>, Error> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Csv(e),
    })?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let path_col = col("path").ok_or_else(|| Error::InvalidData(format!("{}: no `path` column", path.display())))?;
    let Some(value_col) = col(value_column) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let value = &record[value_col];
        let id = value
            .parse()
            .map_err(|_| Error::InvalidData(format!("{}: `{value}` is not a class id", path.display())))?;
        out.push((record[path_col].to_string(), id));
    }
    Ok(out)
}

fn metrics_cmd(args: MetricsArgs) -> Result<bool, Error> {
    let preds = read_pairs(&args.pred, "predicted")?;
    if preds.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no predictions", args.pred.display())));
    }
    let truth: HashMap<String, usize> = match &args.truth {
        Some(t) => read_pairs(t, "label")?.into_iter().collect(),
        None => read_pairs(&args.pred, "true")?.into_iter().collect(),
    };
    let mut pred = Vec::new();
    let mut actual = Vec::new();
    let mut unmatched = 0;
    for (path, p) in &preds {
        match truth.get(path) {
            Some(t) => {
                pred.push(*p);
                actual.push(*t);
            }
            None => {
                eprintln!("no ground truth for {path}");
                unmatched += 1;
            }
        }
    }
    let k = args
        .classes
        .unwrap_or_else(|| pred.iter().chain(&actual).max().map_or(0, |m| m + 1));
    let cm = build_cm(&pred, &actual, k)?;
    let report = metrics(&cm);

    println!("confusion matrix (rows predicted, columns true):");
    for row in cm.rows() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>6}")).collect();
        println!("{}", cells.join(""));
    }
    println!();
    print!("{}", class_table(&report, &[]));
    if let Some(pos) = report.positive {
        println!(
            "positive class: sensitivity {:.4} specificity {:.4} precision {:.4} f1 {:.4}",
            pos.sensitivity, pos.specificity, pos.precision, pos.f1
        );
    }
    println!("accuracy {:.4}  kappa {:.4}", report.accuracy, report.kappa);
    if let Some(path) = &args.csv {
        std::fs::write(path, report_csv(&[report], &[args.method])?)?;
    }
    Ok(unmatched == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Preview(a) => preview(a),
        Command::Metrics(a) => metrics_cmd(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
