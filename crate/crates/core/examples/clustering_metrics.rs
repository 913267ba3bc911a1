//! k-means on a synthetic view and the four scores, plus how the scores
//! react to a relabelled or a random prediction.
//!
//! cargo run --release --example clustering_metrics

use capimac::cluster::{accuracy, ari, evaluate, f1_weighted, kmeans, nmi};
use capimac::data::{generate_synthetic, SyntheticSpec};
use rand::{Rng, SeedableRng};

fn main() -> capimac::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        k: 4,
        n: 400,
        dims: vec![6],
        separation: 4.0,
        seed: 5,
    })?;
    let fit = kmeans(ds.views()[0].values(), 4, 0, 10)?;
    println!("inertia per iteration: {:.1?}", fit.history);
    println!("{:?}", evaluate(&fit.labels, ds.labels(), 0, 4)?);

    let shifted: Vec<usize> = fit.labels.iter().map(|l| (l + 1) % 4).collect();
    println!("relabelled prediction: acc {:.4}", accuracy(&shifted, ds.labels())?);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let random: Vec<usize> = (0..ds.n()).map(|_| rng.random_range(0..4)).collect();
    println!(
        "random prediction: acc {:.4} nmi {:.4} ari {:+.4} f1 {:.4}",
        accuracy(&random, ds.labels())?,
        nmi(&random, ds.labels())?,
        ari(&random, ds.labels())?,
        f1_weighted(&random, ds.labels())?
    );
    Ok(())
}
