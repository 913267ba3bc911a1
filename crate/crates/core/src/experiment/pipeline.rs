use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use super::config::{DatasetSource, EncoderKind, ExperimentConfig};
use crate::align::{
    build_cost_matrix, fuse, fuse_pairs, hungarian, pad_and_realign, reorder_rows, Assignment, CostMatrix,
    KernelConfig, Orientation, PaddedAlignment, Reordered,
};
use crate::anchor::{default_anchor_count, rerepresent, select_anchors, AnchorSummary, WalkConfig};
use crate::cluster::{evaluate, kmeans, ClusteringReport};
use crate::data::{
    apply_corruption, generate_synthetic, load_dataset, make_corruption_plan, make_corruption_plan_per_view, CorruptionPlan, MultimodalDataset,
};
use crate::repr::{default_latent_width, encode, train_encoders};
use crate::{Error, Result};

/// Per-stage seeds: the master seed plus a fixed offset per stage, so the
/// ablation arms can share everything up to padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageSeeds {
    pub data: u64,
    pub corruption: u64,
    pub anchors: u64,
    pub training: u64,
    pub padding: u64,
    pub kmeans: u64,
}

impl StageSeeds {
    pub fn derive(master: u64) -> Self {
        let at = |i: u64| master.wrapping_add(i << 32);
        StageSeeds {
            data: master,
            corruption: at(1),
            anchors: at(2),
            training: at(3),
            padding: at(4),
            kmeans: at(5),
        }
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub data_ms: f64,
    pub corrupt_ms: f64,
    pub anchor_ms: f64,
    pub train_ms: f64,
    pub align_ms: f64,
    pub pad_ms: f64,
    pub cluster_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub dataset: String,
    pub align_rate: f64,
    pub missing_rate: f64,
    pub seed: u64,
    pub ipt: bool,
    pub report: ClusteringReport,
    pub timings: StageTimings,
    pub anchors: AnchorSummary,
    /// Rows per view after corruption.
    pub row_counts: Vec<usize>,
    pub fused_rows: usize,
    pub synthesized_rows: usize,
    pub final_loss: Option<f64>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Loads the directory dataset, or generates the synthetic one for `seed`.
pub fn load_or_generate(source: &DatasetSource, seed: u64) -> Result<MultimodalDataset> {
    match source {
        DatasetSource::Dir(dir) => load_dataset(dir),
        DatasetSource::Synthetic { .. } => {
            let spec = source.synthetic_spec(StageSeeds::derive(seed).data).expect("synthetic source");
            generate_synthetic(&spec)
        }
    }
}

/// Rows scaled to unit length; zero rows stay zero.
fn unit_rows(mut x: Array2<f64>) -> Array2<f64> {
    for mut row in x.rows_mut() {
        let n = row.dot(&row).sqrt();
        if n > 0.0 {
            row /= n;
        }
    }
    x
}

/// Column z-scores using the statistics of the first `rows` rows. Constant
/// columns are only centred.
fn standardize(x: &Array2<f64>, rows: usize) -> Array2<f64> {
    let block = x.slice(ndarray::s![..rows, ..]);
    let mean = block.mean_axis(ndarray::Axis(0)).expect("non-empty aligned block");
    let std = block.std_axis(ndarray::Axis(0), 0.0).mapv(|s| if s > 0.0 { s } else { 1.0 });
    (x - &mean) / &std
}

/// Everything up to (and including) the first Hungarian matching. Shared by
/// both ablation arms.
pub struct Prepared {
    pub plan: CorruptionPlan,
    pub row_counts: Vec<usize>,
    pub anchors: AnchorSummary,
    pub latents: [Array2<f64>; 2],
    /// Class labels per view after corruption.
    pub labels: Vec<Vec<usize>>,
    /// Loss before every training epoch; empty for the identity encoder.
    pub losses: Vec<f64>,
    pub cost: CostMatrix,
    pub assignment: Assignment,
    pub reordered: Reordered,
    pub timings: StageTimings,
}

impl Prepared {
    /// `(short, long)` view indices.
    pub fn sides(&self) -> (usize, usize) {
        match self.cost.orientation {
            Orientation::FirstIsRows => (0, 1),
            Orientation::SecondIsRows => (1, 0),
        }
    }
}

pub fn prepare(
    dataset: &MultimodalDataset,
    align_rate: f64,
    missing_rate: f64,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Prepared> {
    if dataset.views().len() != 2 {
        return Err(Error::invalid(format!("the pipeline needs 2 views, got {}", dataset.views().len())));
    }
    let seeds = StageSeeds::derive(seed);
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let plan = match &cfg.view_missing_rates {
        Some(rates) => make_corruption_plan_per_view(dataset, align_rate, rates, seeds.corruption),
        None => make_corruption_plan(dataset, align_rate, missing_rate, seeds.corruption),
    }
    .map_err(|e| e.in_stage("corrupt"))?;
    let corrupted = apply_corruption(dataset, &plan).map_err(|e| e.in_stage("corrupt"))?;
    timings.corrupt_ms = ms(t);

    let t = Instant::now();
    let walk = WalkConfig {
        alpha: cfg.alpha,
        schedule_override: cfg.walk_schedule,
        initial_distribution: None,
        seed: seeds.anchors,
    };
    let n_a = cfg
        .n_anchors
        .unwrap_or_else(|| default_anchor_count(dataset.k(), corrupted.aligned_count));
    let anchor_set = select_anchors(&corrupted, n_a, cfg.radius, &walk).map_err(|e| e.in_stage("anchor"))?;
    let rerep = |v: usize| {
        rerepresent(&corrupted.views[v], &anchor_set.anchors[v])
            .map(|m| m.into_inner())
            .map_err(|e| e.in_stage("anchor"))
    };
    let xbar = [unit_rows(rerep(0)?), unit_rows(rerep(1)?)];
    timings.anchor_ms = ms(t);

    let t = Instant::now();
    let aligned = corrupted.aligned_count;
    let block = |x: &Array2<f64>| x.slice(ndarray::s![..aligned, ..]).to_owned();
    let (latents, losses) = match cfg.encoder {
        EncoderKind::Identity => (xbar, Vec::new()),
        EncoderKind::Trained => {
            let xbar = [standardize(&xbar[0], aligned), standardize(&xbar[1], aligned)];
            let mut loss = cfg.loss.clone();
            loss.seed = seeds.training;
            let latent = cfg.latent.unwrap_or_else(|| default_latent_width(anchor_set.unified.len()));
            let trained = train_encoders(block(&xbar[0]).view(), block(&xbar[1]).view(), &loss, latent)
                .map_err(|e| e.in_stage("train"))?;
            let z0 = encode(&trained.first, xbar[0].view()).map_err(|e| e.in_stage("train"))?;
            let z1 = encode(&trained.second, xbar[1].view()).map_err(|e| e.in_stage("train"))?;
            ([z0, z1], trained.losses)
        }
    };
    timings.train_ms = ms(t);

    let t = Instant::now();
    let cost = build_cost_matrix(latents[0].view(), latents[1].view()).map_err(|e| e.in_stage("align"))?;
    let assignment = hungarian(cost.z.view()).map_err(|e| e.in_stage("align"))?;
    let reordered = reorder_rows(&cost, &assignment).map_err(|e| e.in_stage("align"))?;
    timings.align_ms = ms(t);

    Ok(Prepared {
        row_counts: corrupted.row_counts(),
        anchors: anchor_set.summary(),
        labels: corrupted.virtual_labels.clone(),
        plan,
        latents,
        losses,
        cost,
        assignment,
        reordered,
        timings,
    })
}

/// Padding (or dropping), fusion, k-means and scoring for one arm.
pub fn finish(
    prep: &Prepared,
    ipt: bool,
    k: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(ClusteringReport, StageTimings, usize, Option<PaddedAlignment>)> {
    let seeds = StageSeeds::derive(seed);
    let mut timings = prep.timings;
    let (s, l) = prep.sides();
    let short: ArrayView2<f64> = prep.latents[s].view();
    let long: ArrayView2<f64> = prep.latents[l].view();

    let t = Instant::now();
    // With equal row counts padding is a no-op, so both arms reuse the
    // first matching.
    let (fused, padded) = if ipt && long.nrows() > short.nrows() {
        let kcfg = KernelConfig {
            sigma: cfg.sigma,
            seed: seeds.padding,
        };
        let padded = pad_and_realign(short, long, &prep.reordered, &kcfg).map_err(|e| e.in_stage("pad"))?;
        let fused = fuse(&padded, long, &prep.labels[l]).map_err(|e| e.in_stage("pad"))?;
        (fused, Some(padded))
    } else {
        let fused =
            fuse_pairs(short, long, &prep.assignment.pairs, &prep.labels[l]).map_err(|e| e.in_stage("pad"))?;
        (fused, None)
    };
    timings.pad_ms = ms(t);

    let t = Instant::now();
    let fit = kmeans(fused.features.view(), k, seeds.kmeans, cfg.restarts).map_err(|e| e.in_stage("cluster"))?;
    let report = evaluate(&fit.labels, &fused.labels, seed, k).map_err(|e| e.in_stage("cluster"))?;
    timings.cluster_ms = ms(t);
    Ok((report, timings, fused.labels.len(), padded))
}

/// Runs the requested arms (`ipt` flags) on one shared preparation.
pub fn run_arms(
    dataset: &MultimodalDataset,
    align_rate: f64,
    missing_rate: f64,
    cfg: &ExperimentConfig,
    seed: u64,
    arms: &[bool],
) -> Result<Vec<RunRecord>> {
    let prep = prepare(dataset, align_rate, missing_rate, cfg, seed)?;
    let mut out = Vec::with_capacity(arms.len());
    for &ipt in arms {
        let (report, timings, fused_rows, padded) = finish(&prep, ipt, dataset.k(), cfg, seed)?;
        if cfg.dump_matrices {
            let dir = cfg
                .out_dir
                .join("matrices")
                .join(format!("align{align_rate}_seed{seed}_{}", if ipt { "ipt" } else { "noipt" }));
            dump_matrices(&prep, padded.as_ref(), &dir)?;
        }
        out.push(RunRecord {
            dataset: cfg.dataset.name(),
            align_rate,
            missing_rate,
            seed,
            ipt,
            report,
            timings,
            anchors: prep.anchors.clone(),
            row_counts: prep.row_counts.clone(),
            fused_rows,
            synthesized_rows: padded.as_ref().map_or(0, |p| p.synthesized()),
            final_loss: prep.losses.last().copied(),
        });
    }
    Ok(out)
}

/// One full pass with `cfg.ipt` deciding the padding arm.
pub fn run_pipeline(
    dataset: &MultimodalDataset,
    align_rate: f64,
    missing_rate: f64,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunRecord> {
    Ok(run_arms(dataset, align_rate, missing_rate, cfg, seed, &[cfg.ipt])?.remove(0))
}

fn sweep(cfg: &ExperimentConfig, arms: &[bool]) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let fixed = match &cfg.dataset {
        DatasetSource::Dir(_) => Some(load_or_generate(&cfg.dataset, 0).map_err(|e| e.in_stage("data"))?),
        DatasetSource::Synthetic { .. } => None,
    };
    let mut records = Vec::new();
    for &seed in &cfg.seeds {
        let t = Instant::now();
        let generated;
        let dataset = match &fixed {
            Some(d) => d,
            None => {
                generated = load_or_generate(&cfg.dataset, seed).map_err(|e| e.in_stage("data"))?;
                &generated
            }
        };
        let data_ms = ms(t);
        for &rate in &cfg.align_rates {
            for mut r in run_arms(dataset, rate, cfg.missing_rate, cfg, seed, arms)? {
                r.timings.data_ms = data_ms;
                records.push(r);
            }
        }
    }
    Ok(records)
}

/// Every `(align_rate, seed)` pair with the configured arm.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    sweep(cfg, &[cfg.ipt])
}

/// Every `(align_rate, seed)` pair twice, `(ipt, no_ipt)`, sharing the
/// corruption plan, anchors and encoders.
pub fn run_ablation(cfg: &ExperimentConfig) -> Result<Vec<(RunRecord, RunRecord)>> {
    let records = sweep(cfg, &[true, false])?;
    let mut it = records.into_iter();
    let mut pairs = Vec::new();
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        pairs.push((a, b));
    }
    Ok(pairs)
}

fn write_matrix(path: &Path, m: ArrayView2<f64>) -> Result<()> {
    let io = |source| Error::Io {
        file: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new().from_path(path).map_err(|e| io(e.into()))?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

fn dump_matrices(prep: &Prepared, padded: Option<&PaddedAlignment>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        file: dir.to_path_buf(),
        source,
    })?;
    write_matrix(&dir.join("z.csv"), prep.cost.z.view())?;
    write_matrix(&dir.join("z_r.csv"), prep.reordered.z_r.view())?;
    let pairs = match padded {
        Some(p) => {
            write_matrix(&dir.join("z_padded.csv"), p.expanded_cost.view())?;
            p.final_pairs.iter().map(|&(l, s)| (s, l)).collect()
        }
        None => prep.assignment.pairs.clone(),
    };
    let m = Array2::from_shape_fn((pairs.len(), 2), |(i, j)| if j == 0 { pairs[i].0 } else { pairs[i].1 } as f64);
    write_matrix(&dir.join("matching.csv"), m.view())?;
    if !prep.losses.is_empty() {
        let log = Array2::from_shape_fn((prep.losses.len(), 2), |(e, j)| if j == 0 { e as f64 } else { prep.losses[e] });
        write_matrix(&dir.join("training_loss.csv"), log.view())?;
    }
    Ok(())
}
