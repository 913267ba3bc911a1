//! Padding vs. dropping the unmatched rows, on balanced and on imbalanced
//! views. Both arms of a pair share corruption, anchors and encoders.
//!
//! cargo run --release --example ablation

use capimac::experiment::{run_ablation, DatasetSource, ExperimentConfig};

fn show(title: &str, cfg: &ExperimentConfig) -> capimac::Result<()> {
    println!("{title}");
    for (with, without) in run_ablation(cfg)? {
        println!(
            "  align {} seed {}: padded acc {:.3} on {} rows ({} synthetic) | dropped acc {:.3} on {} rows",
            with.align_rate,
            with.seed,
            with.report.acc,
            with.fused_rows,
            with.synthesized_rows,
            without.report.acc,
            without.fused_rows
        );
    }
    Ok(())
}

fn main() -> capimac::Result<()> {
    let mut cfg = ExperimentConfig::new(DatasetSource::parse_synthetic("3,300,10,15,6")?);
    cfg.align_rates = vec![0.3, 0.7];
    cfg.seeds = vec![0, 1, 2];
    show("same missing rate in both views", &cfg)?;
    cfg.view_missing_rates = Some(vec![0.5, 0.2]);
    show("\nmissing rates 0.5 / 0.2", &cfg)?;
    Ok(())
}
