//! Train the two encoders with the noise-contrastive loss on aligned pairs
//! and compare cross-view distances before and after. Negatives that share
//! a class barely feel the loss near distance zero, so they stay close.
//!
//! cargo run --release --example contrastive_training

use capimac::anchor::{default_anchor_count, rerepresent, select_anchors, WalkConfig};
use capimac::data::{apply_corruption, generate_synthetic, make_corruption_plan, SyntheticSpec};
use capimac::repr::{
    cosine_distance, default_latent_width, encode, init_encoders, noise_contrastive_loss, sample_pairs,
    train_encoders, LossConfig,
};
use ndarray::{Array2, Axis};

fn standardize(x: &Array2<f64>) -> Array2<f64> {
    let mean = x.mean_axis(Axis(0)).unwrap();
    let std = x.std_axis(Axis(0), 0.0).mapv(|s| if s > 0.0 { s } else { 1.0 });
    (x - &mean) / &std
}

/// Mean cosine distance of positives, same-class negatives and
/// different-class negatives.
fn distances(a: &Array2<f64>, b: &Array2<f64>, labels: &[usize]) -> [f64; 3] {
    let n = a.nrows();
    let mut sum = [0.0; 3];
    let mut count = [0usize; 3];
    for i in 0..n {
        for j in 0..n {
            let kind = if i == j { 0 } else if labels[i] == labels[j] { 1 } else { 2 };
            sum[kind] += cosine_distance(a.row(i), b.row(j)).unwrap();
            count[kind] += 1;
        }
    }
    [0, 1, 2].map(|k| sum[k] / count[k] as f64)
}

fn main() -> capimac::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        k: 3,
        n: 300,
        dims: vec![10, 15],
        separation: 6.0,
        seed: 2,
    })?;
    let corrupted = apply_corruption(&ds, &make_corruption_plan(&ds, 0.5, 0.5, 2)?)?;
    let n_a = default_anchor_count(ds.k(), corrupted.aligned_count);
    let set = select_anchors(&corrupted, n_a, None, &WalkConfig::default())?;
    let x: Vec<Array2<f64>> = (0..2)
        .map(|v| Ok(standardize(&rerepresent(&corrupted.aligned_block(v), &set.anchors[v])?.into_inner())))
        .collect::<capimac::Result<_>>()?;

    let cfg = LossConfig {
        learning_rate: 5e-3,
        ..LossConfig::default()
    };
    let latent = default_latent_width(set.unified.len());
    let width = set.unified.len();
    let (p1, p2) = init_encoders(width, width, latent, cfg.seed);
    let batch = sample_pairs(x[0].view(), x[1].view(), cfg.neg_ratio, 9)?;
    let labels = &corrupted.virtual_labels[0][..corrupted.aligned_count];
    let show = |when: &str, d: [f64; 3]| {
        println!(
            "{when}: positive {:.3}, same-class negative {:.3}, other-class negative {:.3}",
            d[0], d[1], d[2]
        )
    };

    let (z1, z2) = (encode(&p1, x[0].view())?, encode(&p2, x[1].view())?);
    show("untrained", distances(&z1, &z2, labels));

    let trained = train_encoders(x[0].view(), x[1].view(), &cfg, latent)?;
    for e in (0..cfg.epochs).step_by(40) {
        println!("  epoch {e:>3}: loss {:.5}", trained.losses[e]);
    }
    let (z1, z2) = (encode(&trained.first, x[0].view())?, encode(&trained.second, x[1].view())?);
    show("trained  ", distances(&z1, &z2, labels));

    let fresh = capimac::repr::PairBatch::new(
        encode(&trained.first, batch.left())?,
        encode(&trained.second, batch.right())?,
        batch.labels().to_vec(),
    )?;
    println!(
        "loss on an independent pair sample: {:.5}",
        noise_contrastive_loss(&fresh, cfg.margin, cfg.a)?
    );
    Ok(())
}
