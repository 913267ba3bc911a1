//! Batch experiments: configuration, the end-to-end pipeline, the padding
//! ablation and report files.

mod config;
mod pipeline;
mod report;

pub use config::{DatasetSource, EncoderKind, ExperimentConfig};
pub use pipeline::{
    finish, load_or_generate, prepare, run_ablation, run_arms, run_experiment, run_pipeline, Prepared, RunRecord,
    StageSeeds, StageTimings,
};
pub use report::{emit_report, sorted, summarize, MeanStd, Summary};
