//! Self-repellent walk scores and greedy anchor selection on one view, then
//! the anchor re-representation of both views.
//!
//! cargo run --release --example anchor_search

use std::time::Instant;

use capimac::anchor::{
    default_anchor_count, default_radius, greedy_sweeps, rerepresent, select_anchors, view_visit_scores, WalkConfig,
};
use capimac::data::{apply_corruption, generate_synthetic, make_corruption_plan, SyntheticSpec};

fn main() -> capimac::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        k: 3,
        n: 300,
        dims: vec![10, 15],
        separation: 6.0,
        seed: 0,
    })?;
    let plan = make_corruption_plan(&ds, 0.5, 0.5, 0)?;
    let corrupted = apply_corruption(&ds, &plan)?;
    let block = corrupted.aligned_block(0);
    let labels = &corrupted.virtual_labels[0];

    let cfg = WalkConfig::default();
    let (scores, kernel) = view_visit_scores(&block, &cfg)?;
    let mut top: Vec<usize> = (0..block.n_rows()).collect();
    top.sort_by(|&a, &b| scores.0[b].total_cmp(&scores.0[a]));
    println!("walk kernel: {kernel:?}");
    println!("top visited rows: {:?}", &top[..8]);

    let n_a = default_anchor_count(ds.k(), corrupted.aligned_count);
    let radius = default_radius(&block, 0);
    let sweeps = greedy_sweeps(&block, &scores, radius, n_a)?;
    println!("\n{n_a} anchors at radius {radius:.3} took {} sweep(s)", sweeps.len());
    for (i, sweep) in sweeps.iter().enumerate() {
        let classes: Vec<usize> = sweep.iter().map(|&r| labels[r]).collect();
        println!("  sweep {i}: rows {sweep:?}\n           classes {classes:?}");
    }

    let t = Instant::now();
    let set = select_anchors(&corrupted, n_a, None, &cfg)?;
    println!("\nboth views: {:?} in {:.1} ms", set.summary(), t.elapsed().as_secs_f64() * 1e3);
    let xbar = rerepresent(&corrupted.views[1], &set.anchors[1])?;
    println!("view 1 re-represented: {} x {}", xbar.n_rows(), xbar.n_cols());
    Ok(())
}
