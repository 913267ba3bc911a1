use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::pipeline::RunRecord;
use crate::{Error, Result};

const HEADER: [&str; 16] = [
    "dataset",
    "align_rate",
    "missing_rate",
    "seed",
    "ipt",
    "acc",
    "nmi",
    "ari",
    "f1",
    "data_ms",
    "corrupt_ms",
    "anchor_ms",
    "train_ms",
    "align_ms",
    "pad_ms",
    "cluster_ms",
];

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

/// Aggregate over seeds for one `(dataset, align_rate, ipt)` group.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub dataset: String,
    pub align_rate: f64,
    pub missing_rate: f64,
    pub ipt: bool,
    pub runs: usize,
    pub acc: MeanStd,
    pub nmi: MeanStd,
    pub ari: MeanStd,
    pub f1: MeanStd,
}

fn sort_key(r: &RunRecord) -> (String, u64, u64, u64, bool) {
    (
        r.dataset.clone(),
        r.align_rate.to_bits(),
        r.missing_rate.to_bits(),
        r.seed,
        !r.ipt,
    )
}

/// Records in report order: dataset, align rate, missing rate, seed, IPT arm
/// first.
pub fn sorted(records: &[RunRecord]) -> Vec<RunRecord> {
    let mut out = records.to_vec();
    out.sort_by_key(sort_key);
    out
}

pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, u64, u64, bool), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.dataset.clone(), r.align_rate.to_bits(), r.missing_rate.to_bits(), !r.ipt))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let metric = |f: fn(&RunRecord) -> f64| MeanStd::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            Summary {
                dataset: rs[0].dataset.clone(),
                align_rate: rs[0].align_rate,
                missing_rate: rs[0].missing_rate,
                ipt: rs[0].ipt,
                runs: rs.len(),
                acc: metric(|r| r.report.acc),
                nmi: metric(|r| r.report.nmi),
                ari: metric(|r| r.report.ari),
                f1: metric(|r| r.report.f1_weighted),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct JsonReport<'a, C: Serialize> {
    config: &'a C,
    records: &'a [RunRecord],
    summary: Vec<Summary>,
}

fn io_err(file: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        file: file.to_path_buf(),
        source,
    }
}

/// Writes `results.csv` and `results.json` into `dir` and returns their
/// paths. Output depends only on the inputs.
pub fn emit_report<C: Serialize>(records: &[RunRecord], config: &C, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let records = sorted(records);

    let csv_path = dir.join("results.csv");
    let err = io_err(&csv_path);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&csv_path)
        .map_err(|e| err(e.into()))?;
    w.write_record(HEADER).map_err(|e| err(e.into()))?;
    for r in &records {
        let t = &r.timings;
        let row = [
            r.dataset.clone(),
            r.align_rate.to_string(),
            r.missing_rate.to_string(),
            r.seed.to_string(),
            r.ipt.to_string(),
            r.report.acc.to_string(),
            r.report.nmi.to_string(),
            r.report.ari.to_string(),
            r.report.f1_weighted.to_string(),
            format!("{:.3}", t.data_ms),
            format!("{:.3}", t.corrupt_ms),
            format!("{:.3}", t.anchor_ms),
            format!("{:.3}", t.train_ms),
            format!("{:.3}", t.align_ms),
            format!("{:.3}", t.pad_ms),
            format!("{:.3}", t.cluster_ms),
        ];
        w.write_record(&row).map_err(|e| err(e.into()))?;
    }
    w.flush().map_err(&err)?;

    let json_path = dir.join("results.json");
    let report = JsonReport {
        config,
        records: &records,
        summary: summarize(&records),
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| io_err(&json_path)(e.into()))?;
    text.push('\n');
    std::fs::write(&json_path, text).map_err(io_err(&json_path))?;
    drop(err);
    Ok(vec![csv_path, json_path])
}
