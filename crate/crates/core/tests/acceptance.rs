//! Acceptance checks, one line per criterion. Run with
//! `cargo test --test acceptance`; exits non-zero if any check fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fundus_prep::eval_metrics::{metrics, ConfusionMatrix};
use fundus_prep::histops::{clahe_channel, hist_equalize, ClaheParams};
use fundus_prep::imgcore::{save_image, to_grayscale, ImageBuffer};
use fundus_prep::pca_amp::{pcar_candidates, pcar_with, recover_radiance, PcarMode, PcarParams, TransmissionMap};
use fundus_prep::phantom::{PhantomSpec, Vessel};
use fundus_prep::pipeline::{run_batch, AugmentOp, BatchConfig, DatasetManifest, MethodId, Task};
use fundus_prep::vessel_erosion::{clean_image, ErosionParams, VesselMask, VESSEL_THRESHOLD};
use fundus_prep::{dpfrr, dpfrr_clahe, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn metric_reproduction() -> Check {
    let start = Instant::now();
    let cm = ConfusionMatrix::from_rows(&[vec![72, 0], vec![2, 11]]).map_err(|e| e.to_string())?;
    let r = metrics(&cm);
    let plus = &r.per_class[1];
    ensure((r.accuracy - 0.9765).abs() <= 1e-4, format!("accuracy {}", r.accuracy))?;
    ensure(plus.sensitivity == 1.0, format!("sensitivity {}", plus.sensitivity))?;
    ensure(
        (plus.precision - 0.846).abs() < 5e-4 && format!("{:.2}", plus.precision) == "0.85",
        format!("precision {}", plus.precision),
    )?;
    ensure((plus.specificity - 0.973).abs() < 5e-4, format!("specificity {}", plus.specificity))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!(
        "acc {:.4} sens {:.2} prec {:.3} spec {:.3}",
        r.accuracy, plus.sensitivity, plus.precision, plus.specificity
    ))
}

fn stage_table() -> Check {
    let start = Instant::now();
    let cm = ConfusionMatrix::from_rows(&[
        vec![10, 2, 2, 1],
        vec![2, 6, 1, 0],
        vec![3, 1, 15, 1],
        vec![1, 1, 0, 12],
    ])
    .map_err(|e| e.to_string())?;
    let r = metrics(&cm);
    let expected = [0.63, 0.60, 0.83, 0.86];
    let got: Vec<f64> = r.per_class.iter().map(|m| m.sensitivity).collect();
    for (c, (g, e)) in got.iter().zip(expected).enumerate() {
        ensure((g - e).abs() <= 0.01, format!("stage {c}: {g:.4} vs {e}"))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("sensitivities {:.2?}", got))
}

fn grayscale_conformance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000;
    let data: Vec<f64> = (0..n * 3).map(|_| rng.gen::<f64>()).collect();
    let img = ImageBuffer::new(n, 1, 3, data.clone()).map_err(|e| e.to_string())?;
    let gray = to_grayscale(&img).map_err(|e| e.to_string())?;
    let mut max_err = 0.0f64;
    let mut max_levels = 0i64;
    for (i, px) in data.chunks_exact(3).enumerate() {
        let expect = 0.3 * px[0] + 0.59 * px[1] + 0.11 * px[2];
        let got = gray.data()[i];
        max_err = max_err.max((got - expect).abs());
        let (a, b) = ((got * 255.0).round() as i64, (expect * 255.0).round() as i64);
        max_levels = max_levels.max((a - b).abs());
    }
    ensure(max_err <= 1.0 / 255.0, format!("max error {max_err}"))?;
    ensure(max_levels <= 1, format!("max 8-bit difference {max_levels}"))?;
    Ok(format!("{n} pixels, max error {max_err:.2e}, max 8-bit diff {max_levels}"))
}

/// Plain equalization computed directly: level -> inclusive cdf / total.
fn he_oracle(values: &[f64]) -> Vec<f64> {
    let level = |v: f64| (v * 255.0).round() as usize;
    let mut hist = [0usize; 256];
    for v in values {
        hist[level(*v)] += 1;
    }
    let mut cdf = [0usize; 256];
    let mut acc = 0;
    for (i, h) in hist.iter().enumerate() {
        acc += h;
        cdf[i] = acc;
    }
    values.iter().map(|v| cdf[level(*v)] as f64 / values.len() as f64).collect()
}

fn clahe_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = ClaheParams::new(f64::INFINITY, (1, 1)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let lo = rng.gen_range(0.0..0.5);
        let span = rng.gen_range(0.1..0.5);
        let data: Vec<f64> = (0..64 * 64).map(|_| lo + span * rng.gen::<f64>()).collect();
        let img = ImageBuffer::new(64, 64, 1, data.clone()).map_err(|e| e.to_string())?;
        let clahe = clahe_channel(&img, &p).map_err(|e| e.to_string())?;
        let he = hist_equalize(&img).map_err(|e| e.to_string())?;
        for ((c, h), o) in clahe.data().iter().zip(he.data()).zip(he_oracle(&data)) {
            worst = worst.max((c - h).abs()).max((c - o).abs());
        }
    }
    ensure(worst <= 1.0 / 255.0, format!("max deviation {worst}"))?;
    Ok(format!("100 images, max deviation {worst:.2e}"))
}

fn luma_median(img: &ImageBuffer) -> f64 {
    let mut y: Vec<f64> = img
        .data()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
        .collect();
    y.sort_by(f64::total_cmp);
    let n = y.len();
    if n % 2 == 1 {
        y[n / 2]
    } else {
        0.5 * (y[n / 2 - 1] + y[n / 2])
    }
}

fn random_phantom(rng: &mut ChaCha8Rng) -> ImageBuffer {
    let vessels = (0..rng.gen_range(1..5))
        .map(|_| {
            Vessel::new(
                (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                rng.gen_range(1.0..4.0),
            )
        })
        .collect();
    PhantomSpec {
        width: rng.gen_range(48..80),
        height: rng.gen_range(48..80),
        background: [rng.gen_range(0.2..0.9), rng.gen_range(0.1..0.6), rng.gen_range(0.02..0.3)],
        vessel_color: [rng.gen_range(0.1..0.6), rng.gen_range(0.05..0.3), rng.gen_range(0.01..0.2)],
        vessels,
        disc: rng.gen_bool(0.5),
        vignette: rng.gen_range(0.0..0.6),
        veil: rng.gen_range(0.0..0.3),
        glare: None,
        noise: 0.03,
        seed: rng.gen(),
    }
    .build()
    .observed
}

fn pcar_selection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut composite_pixels = 0usize;
    for trial in 0..50 {
        let img = random_phantom(&mut rng);
        let single = PcarParams {
            mode: PcarMode::Single,
            ..PcarParams::default()
        };
        let eval = pcar_candidates(&img, &single).map_err(|e| e.to_string())?;
        ensure(eval.candidates.len() == 8, "expected 8 candidates")?;
        let scores: Vec<f64> = eval.candidates.iter().map(|c| (luma_median(&c.image) - 0.5).abs()).collect();
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s < scores[best] {
                best = i;
            }
        }
        let out = pcar_with(&img, &single).map_err(|e| e.to_string())?;
        let expected = eval
            .crop
            .reassemble(&img, &eval.candidates[best].image)
            .map_err(|e| e.to_string())?;
        ensure(out == expected, format!("trial {trial}: single output is not candidate {best}"))?;

        // Members: two lowest-scoring brightening, highest-scoring darkening.
        let mut bright: Vec<usize> = (0..4).collect();
        bright.sort_by(|a, b| scores[*a].total_cmp(&scores[*b]));
        let mut dark = 4;
        for i in 5..8 {
            if scores[i] > scores[dark] {
                dark = i;
            }
        }
        let members = [bright[0], bright[1], dark].map(|i| &eval.candidates[i].image);
        let composite = PcarParams {
            mode: PcarMode::Composite,
            ..PcarParams::default()
        };
        let comp = pcar_with(&img, &composite).map_err(|e| e.to_string())?;
        let crop = &eval.crop;
        for y in 0..crop.image.height() {
            for x in 0..crop.image.width() {
                for c in 0..3 {
                    let vals = members.map(|m| m.get(x, y, c));
                    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let v = comp.get(crop.x + x, crop.y + y, c);
                    ensure(
                        v >= lo - 1e-12 && v <= hi + 1e-12,
                        format!("trial {trial}: composite {v} outside [{lo}, {hi}]"),
                    )?;
                    composite_pixels += 1;
                }
            }
        }
    }
    Ok(format!("50 phantoms, {composite_pixels} composite samples inside envelope"))
}

fn dehazing_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data: Vec<f64> = (0..40 * 30 * 3).map(|_| rng.gen::<f64>()).collect();
    let img = ImageBuffer::new(40, 30, 3, data).map_err(|e| e.to_string())?;
    let ones = TransmissionMap::uniform(40, 30, 1.0).map_err(|e| e.to_string())?;
    for a in [0.0, 0.5, 1.0] {
        let out = recover_radiance(&img, a, &ones).map_err(|e| e.to_string())?;
        ensure(out == img, format!("t=1, A={a} changed the image"))?;
    }
    let grey = ImageBuffer::filled(4, 4, &[0.75, 0.75, 0.75]).map_err(|e| e.to_string())?;
    let half = TransmissionMap::uniform(4, 4, 0.5).map_err(|e| e.to_string())?;
    let out = recover_radiance(&grey, 1.0, &half).map_err(|e| e.to_string())?;
    let worst = out.data().iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-9, format!("A=1, t=0.5, I=0.75 gave error {worst}"))?;
    Ok("t=1 bit-exact; (A=1, t=0.5, I=0.75) -> 0.5".into())
}

fn l2(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn vessel_gap(img: &ImageBuffer, mask: &VesselMask) -> f64 {
    let (mut bg, mut nb, mut vs, mut nv) = (0.0, 0.0, 0.0, 0.0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let p = img.pixel(x, y);
            let l = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
            if mask.is_vessel(x, y) {
                vs += l;
                nv += 1.0;
            } else {
                bg += l;
                nb += 1.0;
            }
        }
    }
    bg / nb - vs / nv
}

fn dpfrr_phantom() -> Check {
    let mut details = Vec::new();
    for (i, size) in [128usize, 256].into_iter().enumerate() {
        let start = Instant::now();
        let ph = PhantomSpec {
            width: size,
            height: size,
            vignette: 0.5,
            veil: 0.25,
            noise: 0.01,
            seed: i as u64,
            ..PhantomSpec::default()
        }
        .build();
        let restored = dpfrr(&ph.observed).map_err(|e| e.to_string())?;
        let hybrid = dpfrr_clahe(&ph.observed).map_err(|e| e.to_string())?;
        let (before, after) = (l2(&ph.observed, &ph.clean), l2(&restored, &ph.clean));
        ensure(after < before, format!("{size}px: L2 to clean {before:.3} -> {after:.3}"))?;
        let (g_r, g_h) = (vessel_gap(&restored, &ph.vessel_mask), vessel_gap(&hybrid, &ph.vessel_mask));
        ensure(g_h >= g_r, format!("{size}px: vessel gap dpfrr {g_r:.4} > hybrid {g_h:.4}"))?;
        within(Duration::from_secs(10), start)?;
        details.push(format!(
            "{size}px L2 {before:.2}->{after:.2}, gap {g_r:.3}/{g_h:.3} in {:.2?}",
            start.elapsed()
        ));
    }
    Ok(details.join("; "))
}

/// Erosion computed directly: per channel, for each scale, vessel pixels
/// take the wrapped `p x p` window mean of the previous scale.
fn erosion_oracle(img: &ImageBuffer, mask: &VesselMask) -> ImageBuffer {
    let (w, h) = img.dims();
    let mut out = img.data().to_vec();
    for c in 0..3 {
        let mut cur: Vec<f64> = (0..w * h).map(|i| img.data()[i * 3 + c]).collect();
        for p in [32usize, 16, 8, 4, 2] {
            let half = (p / 2) as isize;
            let mut next = cur.clone();
            for y in 0..h {
                for x in 0..w {
                    if mask.get(x, y) <= VESSEL_THRESHOLD {
                        continue;
                    }
                    let mut s = 0.0;
                    for dy in 0..p as isize {
                        for dx in 0..p as isize {
                            let sx = (x as isize - half + dx).rem_euclid(w as isize) as usize;
                            let sy = (y as isize - half + dy).rem_euclid(h as isize) as usize;
                            s += cur[sy * w + sx];
                        }
                    }
                    next[y * w + x] = s / (p * p) as f64;
                }
            }
            cur = next;
        }
        for i in 0..w * h {
            out[i * 3 + c] = cur[i];
        }
    }
    ImageBuffer::new(w, h, 3, out).expect("valid dims")
}

fn erosion_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = ErosionParams::default();
    let mut untouched = 0usize;
    let mut worst_oracle = 0.0f64;
    for trial in 0..100 {
        let (w, h) = (rng.gen_range(8..=64), rng.gen_range(8..=64));
        let data: Vec<f64> = (0..w * h * 3).map(|_| rng.gen::<f64>()).collect();
        let img = ImageBuffer::new(w, h, 3, data).map_err(|e| e.to_string())?;
        let density = rng.gen_range(0.0..0.4);
        let mask = VesselMask::from_fn(w, h, |_, _| 0.0).map_err(|e| e.to_string())?;
        let values: Vec<f64> = mask
            .values()
            .iter()
            .map(|_| {
                if rng.gen_bool(density) {
                    rng.gen_range(0.0..=1.0)
                } else {
                    rng.gen_range(0.0..=VESSEL_THRESHOLD)
                }
            })
            .collect();
        let mask = VesselMask::new(w, h, values).map_err(|e| e.to_string())?;
        let out = clean_image(&img, &mask, &p).map_err(|e| e.to_string())?;
        for y in 0..h {
            for x in 0..w {
                if mask.get(x, y) <= VESSEL_THRESHOLD {
                    ensure(
                        out.pixel(x, y) == img.pixel(x, y),
                        format!("trial {trial}: non-vessel pixel ({x}, {y}) changed"),
                    )?;
                    untouched += 1;
                }
            }
        }
        let oracle = erosion_oracle(&img, &mask);
        let dev = out.data().iter().zip(oracle.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_oracle = worst_oracle.max(dev);
    }
    ensure(worst_oracle <= 1e-9, format!("deviation from box-average oracle {worst_oracle}"))?;

    // One-pixel vertical vessel on a flat background.
    let (w, h) = (64, 64);
    let img = ImageBuffer::from_fn(w, h, 3, |x, _, _| if x == 31 { 0.2 } else { 0.8 }).map_err(|e| e.to_string())?;
    let mask = VesselMask::from_fn(w, h, |x, _| if x == 31 { 1.0 } else { 0.0 }).map_err(|e| e.to_string())?;
    let out = clean_image(&img, &mask, &p).map_err(|e| e.to_string())?;
    let oracle = erosion_oracle(&img, &mask);
    let dev = out.data().iter().zip(oracle.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-9, format!("line deviation from oracle {dev}"))?;
    let contrast = |im: &ImageBuffer| (im.get(30, 32, 1) - im.get(31, 32, 1)).abs();
    let ratio = contrast(&out) / contrast(&img);
    ensure(ratio <= 0.2, format!("line contrast ratio {ratio:.3}"))?;
    Ok(format!(
        "{untouched} non-vessel pixels bit-identical, oracle dev {worst_oracle:.1e}, line contrast {:.1}%",
        ratio * 100.0
    ))
}

fn tree_hashes(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).expect("under root").to_string_lossy().into_owned();
                let digest = Sha256::digest(std::fs::read(&path).expect("readable file"));
                out.insert(rel, format!("{digest:x}"));
            }
        }
    }
    out
}

fn pipeline_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = tmp.path().join("input");
    let mut rows = String::from("path,label,split,mask\n");
    for i in 0..6 {
        let ph = PhantomSpec {
            width: 96,
            height: 80,
            disc: true,
            vignette: 0.3,
            veil: 0.1,
            noise: 0.02,
            seed: i,
            ..PhantomSpec::default()
        }
        .build();
        let name = format!("img{i}.png");
        save_image(&ph.observed, input.join(&name)).map_err(|e| e.to_string())?;
        let split = if i < 4 { "train" } else { "val" };
        rows.push_str(&format!("{name},{},{split},\n", i % 2));
    }
    let manifest_path = input.join("manifest.csv");
    std::fs::write(&manifest_path, rows).map_err(|e| e.to_string())?;
    let manifest = DatasetManifest::load(&manifest_path, Task::Plus).map_err(|e| e.to_string())?;

    let cfg = BatchConfig {
        size: (64, 64),
        augment: vec![AugmentOp::HFlip, AugmentOp::Rot15, AugmentOp::Brightness],
        seed: 11,
        workers: Some(3),
        ..BatchConfig::new(MethodId::DpfrrClahe)
    };
    let (a, b) = (tmp.path().join("run_a"), tmp.path().join("run_b"));
    let ra = run_batch(&manifest, &a, &cfg).map_err(|e| e.to_string())?;
    let rb = run_batch(&manifest, &b, &BatchConfig { workers: Some(1), ..cfg.clone() }).map_err(|e| e.to_string())?;
    ensure(ra.is_success() && rb.is_success(), format!("failures {:?} {:?}", ra.failures, rb.failures))?;
    let (ha, hb) = (tree_hashes(&a), tree_hashes(&b));
    ensure(ha.len() == 6 * 4 + 1, format!("expected 25 files, found {}", ha.len()))?;
    ensure(ha == hb, "output trees differ")?;

    // Validation-only run paired with run_a but using another method.
    let val_rows = "path,label,split,mask\nimg4.png,0,val,\nimg5.png,1,val,\n";
    let val_manifest = DatasetManifest::parse(val_rows, &input, Task::Plus).map_err(|e| e.to_string())?;
    let val_out = tmp.path().join("val_pcar");
    let mismatched = BatchConfig {
        paired_with: Some(a.clone()),
        ..BatchConfig::new(MethodId::PcarClahe)
    };
    match run_batch(&val_manifest, &val_out, &mismatched) {
        Err(Error::PairingViolation { .. }) => {}
        other => return Err(format!("expected PairingViolation, got {other:?}")),
    }
    ensure(!val_out.exists(), "files written before the pairing check")?;

    // Re-running into an existing dataset with another method.
    match run_batch(&manifest, &a, &BatchConfig::new(MethodId::Gray)) {
        Err(Error::PairingViolation { .. }) => {}
        other => return Err(format!("expected PairingViolation, got {other:?}")),
    }
    ensure(tree_hashes(&a) == ha, "existing dataset modified by rejected run")?;
    Ok(format!("{} files byte-identical across runs; mismatched pairing rejected with no writes", ha.len()))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 9] = [
        ("metric reproduction (plus table)", metric_reproduction),
        ("stage table cross-check", stage_table),
        ("grayscale conformance", grayscale_conformance),
        ("CLAHE single-tile oracle", clahe_oracle),
        ("PCAr selection property", pcar_selection),
        ("dehazing identity", dehazing_identity),
        ("DPFRr phantom restoration", dpfrr_phantom),
        ("erosion exactness", erosion_exactness),
        ("pipeline determinism and pairing", pipeline_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
