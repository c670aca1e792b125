//! Per-class metrics, kappa and report tables from confusion matrices
//! (rows predicted, columns true).
//!
//!     cargo run --example metrics_tables

use fundus_prep::eval_metrics::{class_table, metrics, report_csv, report_table, ConfusionMatrix};
use fundus_prep::pipeline::MethodId;

fn main() -> fundus_prep::Result<()> {
    let plus = ConfusionMatrix::from_rows(&[vec![72, 0], vec![2, 11]])?;
    let stages = ConfusionMatrix::from_rows(&[
        vec![10, 2, 2, 1],
        vec![2, 6, 1, 0],
        vec![3, 1, 15, 1],
        vec![1, 1, 0, 12],
    ])?;
    let plus_report = metrics(&plus);
    let stage_report = metrics(&stages);

    println!("Plus disease");
    print!("{}", class_table(&plus_report, &["No Plus", "Plus"]));
    println!("kappa {:.4}\n", plus_report.kappa);

    println!("Stages");
    print!("{}", class_table(&stage_report, &["Stage 0", "Stage 1", "Stage 2", "Stage 3"]));
    println!("kappa {:.4}\n", stage_report.kappa);

    let methods = [MethodId::DpfrrClahe, MethodId::DpfrrClahe];
    print!("{}", report_table(&[plus_report.clone(), stage_report.clone()], &methods)?);
    println!();
    print!("{}", report_csv(&[plus_report], &[MethodId::DpfrrClahe])?);
    Ok(())
}
