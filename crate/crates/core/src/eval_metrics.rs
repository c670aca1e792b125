//! Confusion matrices and the per-class / aggregate metrics reported for
//! each pre-processing method.
//!
//! Matrices are indexed `counts[predicted][true]`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::MethodId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// Builds from row-major rows, one row per predicted class.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::EmptyInput("confusion matrix has no classes".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::LengthMismatch {
                left: k,
                right: bad.len(),
            });
        }
        let cm = Self {
            k,
            counts: rows.concat(),
        };
        if cm.total() == 0 {
            return Err(Error::EmptyInput("confusion matrix total is zero".into()));
        }
        Ok(cm)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, predicted: usize, truth: usize) -> u64 {
        self.counts[predicted * self.k + truth]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|c| self.get(c, c)).sum()
    }

    pub fn row_sum(&self, predicted: usize) -> u64 {
        (0..self.k).map(|t| self.get(predicted, t)).sum()
    }

    pub fn col_sum(&self, truth: usize) -> u64 {
        (0..self.k).map(|p| self.get(p, truth)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k).map(<[u64]>::to_vec).collect()
    }

    /// Relabels classes: new class `perm[c]` takes old class `c`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut counts = vec![0; self.counts.len()];
        for p in 0..self.k {
            for t in 0..self.k {
                counts[perm[p] * self.k + perm[t]] = self.get(p, t);
            }
        }
        Self { k: self.k, counts }
    }
}

/// Tallies `counts[pred][truth]` over paired label lists.
pub fn build_cm(pred: &[usize], truth: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("no predictions".into()));
    }
    if k == 0 {
        return Err(Error::EmptyInput("class count is zero".into()));
    }
    let mut counts = vec![0u64; k * k];
    for (p, t) in pred.iter().zip(truth) {
        for c in [*p, *t] {
            if c >= k {
                return Err(Error::ClassOutOfRange { class: c, k });
            }
        }
        counts[p * k + t] += 1;
    }
    Ok(ConfusionMatrix { k, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Set when any ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Aggregate,
    /// Metrics of class 1 for binary tasks.
    pub positive: Option<Aggregate>,
    pub accuracy: f64,
    pub kappa: f64,
}

impl MetricReport {
    /// The single-row summary: positive class for binary tasks, macro average otherwise.
    pub fn headline(&self) -> Aggregate {
        self.positive.unwrap_or(self.macro_avg)
    }
}

fn ratio(num: u64, den: u64, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricReport {
    let k = cm.k();
    let total = cm.total();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.get(c, c);
            let fp = cm.row_sum(c) - tp;
            let fn_ = cm.col_sum(c) - tp;
            let tn = total - tp - fp - fn_;
            let mut degenerate = false;
            let sensitivity = ratio(tp, tp + fn_, &mut degenerate);
            let specificity = ratio(tn, tn + fp, &mut degenerate);
            let precision = ratio(tp, tp + fp, &mut degenerate);
            let f1 = if precision + sensitivity > 0.0 {
                2.0 * precision * sensitivity / (precision + sensitivity)
            } else {
                0.0
            };
            ClassMetrics {
                tp,
                fp,
                fn_,
                tn,
                sensitivity,
                specificity,
                precision,
                f1,
                accuracy: (tp + tn) as f64 / total as f64,
                degenerate,
            }
        })
        .collect();

    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let macro_avg = Aggregate {
        sensitivity: mean(|m| m.sensitivity),
        specificity: mean(|m| m.specificity),
        precision: mean(|m| m.precision),
        f1: mean(|m| m.f1),
    };
    let positive = (k == 2).then(|| {
        let m = &per_class[1];
        Aggregate {
            sensitivity: m.sensitivity,
            specificity: m.specificity,
            precision: m.precision,
            f1: m.f1,
        }
    });

    let n = total as f64;
    let p_o = cm.trace() as f64 / n;
    let p_e: f64 = (0..k)
        .map(|c| (cm.row_sum(c) as f64 / n) * (cm.col_sum(c) as f64 / n))
        .sum();
    let kappa = if (1.0 - p_e).abs() < f64::EPSILON {
        if (p_o - 1.0).abs() < f64::EPSILON {
            1.0
        } else {
            0.0
        }
    } else {
        (p_o - p_e) / (1.0 - p_e)
    };

    MetricReport {
        per_class,
        macro_avg,
        positive,
        accuracy: p_o,
        kappa,
    }
}

pub const CSV_HEADER: &str = "method,class,sensitivity,specificity,precision,f1,accuracy";

fn check_lengths(reports: &[MetricReport], methods: &[MethodId]) -> Result<()> {
    if reports.len() != methods.len() {
        return Err(Error::LengthMismatch {
            left: reports.len(),
            right: methods.len(),
        });
    }
    Ok(())
}

/// Per-class rows for every method, followed by `macro` (and for binary
/// tasks `positive`) aggregate rows whose accuracy column is overall accuracy.
pub fn report_csv(reports: &[MetricReport], methods: &[MethodId]) -> Result<String> {
    check_lengths(reports, methods)?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (r, m) in reports.iter().zip(methods) {
        for (c, cm) in r.per_class.iter().enumerate() {
            let _ = writeln!(
                out,
                "{m},{c},{:.4},{:.4},{:.4},{:.4},{:.4}",
                cm.sensitivity, cm.specificity, cm.precision, cm.f1, cm.accuracy
            );
        }
        let mut aggregates = vec![("macro", r.macro_avg)];
        if let Some(p) = r.positive {
            aggregates.push(("positive", p));
        }
        for (label, a) in aggregates {
            let _ = writeln!(
                out,
                "{m},{label},{:.4},{:.4},{:.4},{:.4},{:.4}",
                a.sensitivity, a.specificity, a.precision, a.f1, r.accuracy
            );
        }
    }
    Ok(out)
}

/// Aligned text table, one row per method, using each report's headline aggregate.
pub fn report_table(reports: &[MetricReport], methods: &[MethodId]) -> Result<String> {
    check_lengths(reports, methods)?;
    let mut out = format!(
        "{:<20}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}\n",
        "Method", "Sensitivity", "Specificity", "Precision", "F1", "Kappa", "Accuracy"
    );
    for (r, m) in reports.iter().zip(methods) {
        let a = r.headline();
        let _ = writeln!(
            out,
            "{:<20}{:>12.4}{:>12.4}{:>12.4}{:>12.4}{:>12.4}{:>12.4}",
            m.to_string(),
            a.sensitivity,
            a.specificity,
            a.precision,
            a.f1,
            r.kappa,
            r.accuracy
        );
    }
    Ok(out)
}

/// Per-class breakdown of a single report, one row per class plus the aggregate.
pub fn class_table(report: &MetricReport, class_names: &[&str]) -> String {
    let mut out = format!(
        "{:<12}{:>12}{:>12}{:>12}{:>12}{:>12}\n",
        "Class", "Sensitivity", "Specificity", "Precision", "F1", "Accuracy"
    );
    for (c, m) in report.per_class.iter().enumerate() {
        let name = class_names.get(c).map_or_else(|| c.to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "{:<12}{:>12.4}{:>12.4}{:>12.4}{:>12.4}{:>12.4}",
            name, m.sensitivity, m.specificity, m.precision, m.f1, m.accuracy
        );
    }
    let a = report.macro_avg;
    let _ = writeln!(
        out,
        "{:<12}{:>12.4}{:>12.4}{:>12.4}{:>12.4}{:>12.4}",
        "macro", a.sensitivity, a.specificity, a.precision, a.f1, report.accuracy
    );
    out
}
