//! Match two views of unequal size with the Hungarian algorithm, pad the
//! short one with kernel-interpolated rows, realign and fuse.
//!
//! cargo run --release --example realignment

use capimac::align::{build_cost_matrix, fuse, hungarian, pad_and_realign, reorder_rows, KernelConfig};
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> capimac::Result<()> {
    let c = array![[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
    let a = hungarian(c.view())?;
    println!("3x3 assignment {:?}, cost {}", a.pairs, a.total_cost);

    // Long view: 12 noisy points around four directions. Short view: the
    // first 9 of them, shuffled.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centers = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
    let labels: Vec<usize> = (0..12).map(|i| i % 4).collect();
    let long = Array2::from_shape_fn((12, 3), |(i, j)| centers[[labels[i], j]] + 0.1 * rng.random::<f64>());
    let order = [4, 0, 7, 2, 8, 1, 6, 3, 5];
    let short = Array2::from_shape_fn((9, 3), |(i, j)| long[[order[i], j]] + 0.05 * rng.random::<f64>());

    let cost = build_cost_matrix(short.view(), long.view())?;
    let first = hungarian(cost.z.view())?;
    let matched: Vec<(usize, usize)> = first.pairs.iter().map(|&(s, l)| (order[s], l)).collect();
    println!("\nfirst matching as (true long row, matched long row): {matched:?}");

    let reordered = reorder_rows(&cost, &first)?;
    println!("sorted pair distances: {:.3?}", reordered.distances);
    let padded = pad_and_realign(short.view(), long.view(), &reordered, &KernelConfig::default())?;
    println!(
        "padded {} rows (sigma {:.3}); synthetic rows at {:?}",
        padded.synthesized(),
        padded.sigma,
        padded
            .synth_flags
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    );
    let fused = fuse(&padded, long.view(), &labels)?;
    println!("fused {} x {}, labels {:?}", fused.features.nrows(), fused.features.ncols(), fused.labels);
    Ok(())
}
