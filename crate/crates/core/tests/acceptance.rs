//! Acceptance suite. Each check prints one PASS/FAIL line; the process exits
//! non-zero if any check fails.

use std::time::Instant;

use capimac::align::{hungarian, interpolate_point};
use capimac::anchor::{
    decay_factor, default_anchor_count, greedy_sweeps, select_anchors, self_repellent_visit_scores,
    transition_matrix, TransitionMatrix, WalkConfig,
};
use capimac::cluster::{accuracy, ari, evaluate, f1_weighted, nmi};
use capimac::data::{
    apply_corruption, generate_synthetic, make_corruption_plan, ModalityMatrix, SyntheticSpec,
};
use capimac::experiment::{
    load_or_generate, run_arms, run_pipeline, DatasetSource, ExperimentConfig, RunRecord,
};
use capimac::repr::{encode, init_encoders, loss_gradient, noise_contrastive_loss, LossConfig, PairBatch};
use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        name,
        pass,
        detail: detail.into(),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn hungarian_vs_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    let trials = 210;
    for t in 0..trials {
        let n = 1 + t % 7;
        // integer costs so "exactly equal" is meaningful
        let c = Array2::from_shape_fn((n, n), |_| rng.random_range(0..50) as f64);
        let solved = hungarian(c.view()).unwrap().total_cost;
        let best = permutations(n)
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| c[[i, j]]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if solved != best {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "Hungarian equals brute-force minimum",
        mismatches == 0 && secs < 5.0,
        format!("{trials} matrices up to 7x7, {mismatches} mismatches, {secs:.2} s (limit 5 s)"),
    )
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let configs = 60;
    for c in 0..configs {
        let d1 = rng.random_range(2..6);
        let d2 = rng.random_range(2..6);
        let latent = rng.random_range(2..5);
        let rows = rng.random_range(2..8);
        let cfg = LossConfig {
            margin: rng.random_range(0.5..2.0),
            a: rng.random_range(0.5..3.0),
            ..LossConfig::default()
        };
        let left = Array2::from_shape_fn((rows, d1), |_| rng.random_range(-1.0..1.0));
        let right = Array2::from_shape_fn((rows, d2), |_| rng.random_range(-1.0..1.0));
        let labels = (0..rows).map(|i| i % 2 == 0).collect();
        let batch = PairBatch::new(left, right, labels).unwrap();
        let (p1, p2) = init_encoders(d1, d2, latent, c);
        let (_, g1, g2) = loss_gradient(&p1, &p2, &batch, &cfg).unwrap();

        let loss = |a: &capimac::repr::EncoderParams, b: &capimac::repr::EncoderParams| {
            let z = PairBatch::new(
                encode(a, batch.left()).unwrap(),
                encode(b, batch.right()).unwrap(),
                batch.labels().to_vec(),
            )
            .unwrap();
            noise_contrastive_loss(&z, cfg.margin, cfg.a).unwrap()
        };
        let mut analytic = g1.flatten();
        analytic.extend(g2.flatten());
        let (f1, f2) = (p1.flatten(), p2.flatten());
        let mut numeric = Vec::with_capacity(analytic.len());
        for k in 0..f1.len() + f2.len() {
            let bump = |s: f64| {
                let (mut a, mut b) = (f1.clone(), f2.clone());
                if k < f1.len() {
                    a[k] += s;
                } else {
                    b[k - f1.len()] += s;
                }
                loss(&p1.with_flat(&a), &p2.with_flat(&b))
            };
            numeric.push((bump(h) - bump(-h)) / (2.0 * h));
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale = analytic
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt())
            .max(1e-8);
        worst = worst.max(diff / scale);
    }
    outcome(
        "analytic gradient matches central differences",
        worst < 1e-4,
        format!("{configs} configurations, worst relative error {worst:.2e} (limit 1e-4)"),
    )
}

fn stochasticity_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_row = 0.0f64;
    let mut worst_diag = 0.0f64;
    let mut min_entry = f64::INFINITY;
    for t in 0..100 {
        let n = rng.random_range(2..40);
        let d = rng.random_range(1..8);
        let shift = if t % 2 == 0 { 0.0 } else { 3.0 };
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0) + shift);
        let p = transition_matrix(&ModalityMatrix::new(x).unwrap()).unwrap();
        let v = p.values();
        for (i, row) in v.axis_iter(Axis(0)).enumerate() {
            worst_row = worst_row.max((row.sum() - 1.0).abs());
            worst_diag = worst_diag.max(row[i].abs());
            min_entry = min_entry.min(row.fold(f64::INFINITY, |m, &e| m.min(e)));
        }
    }
    let mut worst_weights = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..10);
        let u = Array1::from_shape_fn(d, |_| rng.random_range(-50.0..50.0));
        let w = Array1::from_shape_fn(d, |_| rng.random_range(-50.0..50.0));
        let sigma = 10f64.powf(rng.random_range(-3.0..2.0));
        let p = interpolate_point(&[u.view(), w.view()], sigma).unwrap();
        worst_weights = worst_weights.max((p.weights.iter().sum::<f64>() - 1.0).abs());
    }
    let mut worst_scale = 0.0f64;
    for _ in 0..1000 {
        // visit-count scale: x = V + 1 and mu = mean(V) + 1
        let x = rng.random_range(1.0..20.0);
        let mu = rng.random_range(1.0..20.0);
        let alpha = rng.random_range(0.0..2.0);
        let c = rng.random_range(1e-9..1e3);
        let a = decay_factor(x, mu, alpha).unwrap();
        let b = decay_factor(c * x, c * mu, alpha).unwrap();
        worst_scale = worst_scale.max((a - b).abs());
    }
    let pass = worst_row < 1e-9 && worst_diag == 0.0 && min_entry >= 0.0 && worst_weights < 1e-12 && worst_scale < 1e-12;
    outcome(
        "transition, interpolation and decay invariants",
        pass,
        format!(
            "row-sum err {worst_row:.1e}, max |diag| {worst_diag}, min entry {min_entry:.1e}, \
             weight-sum err {worst_weights:.1e}, decay scale err {worst_scale:.1e}"
        ),
    )
}

fn walk_power_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for t in 0..50 {
        let n = 20;
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(-1.0..1.0));
        let p = transition_matrix(&ModalityMatrix::new(x).unwrap()).unwrap();
        let pi: Vec<f64> = if t % 2 == 0 {
            vec![1.0 / n as f64; n]
        } else {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        };
        let cfg = WalkConfig {
            alpha: 0.0,
            initial_distribution: Some(pi.clone()),
            ..WalkConfig::default()
        };
        let got = self_repellent_visit_scores(&p, &cfg).unwrap();
        let (walks, steps) = capimac::anchor::walk_schedule(n);
        let oracle = power_oracle(&p, &pi, walks, steps);
        for (a, b) in got.as_slice().iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        "alpha = 0 walk equals matrix-power sum",
        worst < 1e-9,
        format!("50 random 20-node graphs, max abs error {worst:.1e} (limit 1e-9)"),
    )
}

// sum over walks and steps t = 1..=steps of (pi^T P^t)_j
fn power_oracle(p: &TransitionMatrix, pi: &[f64], walks: usize, steps: usize) -> Vec<f64> {
    let m = p.values();
    let n = m.nrows();
    let mut power = Array2::<f64>::eye(n);
    let mut total = vec![0.0; n];
    for _ in 0..steps {
        power = power.dot(&m);
        for j in 0..n {
            total[j] += (0..n).map(|i| pi[i] * power[[i, j]]).sum::<f64>();
        }
    }
    total.iter().map(|v| v * walks as f64).collect()
}

fn greedy_separation_and_coverage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut runs = 0;
    for _ in 0..30 {
        let n = rng.random_range(5..80);
        let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(0.0..10.0));
        let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let radius = rng.random_range(0.5..6.0);
        let n_a = rng.random_range(1..=n);
        let m = ModalityMatrix::new(x.clone()).unwrap();
        let sweeps = greedy_sweeps(&m, &capimac::anchor::VisitScores(scores), radius, n_a).unwrap();
        runs += 1;
        for sweep in &sweeps {
            for (i, &a) in sweep.iter().enumerate() {
                for &b in &sweep[i + 1..] {
                    let d = (&x.row(a) - &x.row(b)).mapv(|v| v * v).sum().sqrt();
                    if d <= radius {
                        violations += 1;
                    }
                }
            }
        }
    }

    let mut covered = 0;
    for seed in 0..10 {
        let ds = generate_synthetic(&SyntheticSpec {
            k: 3,
            n: 300,
            dims: vec![10, 15],
            separation: 6.0,
            seed,
        })
        .unwrap();
        let plan = make_corruption_plan(&ds, 0.5, 0.5, seed).unwrap();
        let corrupted = apply_corruption(&ds, &plan).unwrap();
        let aligned = corrupted.aligned_count;
        // radius below the smallest distance between class centroids in any view
        let mut min_gap = f64::INFINITY;
        for v in 0..2 {
            let block = corrupted.aligned_block(v);
            let labels = &corrupted.virtual_labels[v][..aligned];
            let centroids: Vec<Array1<f64>> = (0..3)
                .map(|c| {
                    let rows: Vec<usize> = (0..aligned).filter(|&i| labels[i] == c).collect();
                    block.values().select(Axis(0), &rows).mean_axis(Axis(0)).unwrap()
                })
                .collect();
            for a in 0..3 {
                for b in a + 1..3 {
                    min_gap = min_gap.min((&centroids[a] - &centroids[b]).mapv(|v| v * v).sum().sqrt());
                }
            }
        }
        let cfg = WalkConfig {
            seed,
            ..WalkConfig::default()
        };
        let n_a = default_anchor_count(3, aligned);
        let set = select_anchors(&corrupted, n_a, Some(0.9 * min_gap), &cfg).unwrap();
        let mut classes: Vec<usize> = set.unified.iter().map(|&i| corrupted.virtual_labels[0][i]).collect();
        classes.sort();
        classes.dedup();
        if classes.len() == 3 {
            covered += 1;
        }
    }
    outcome(
        "greedy anchors separated within sweeps, every class covered",
        violations == 0 && covered == 10,
        format!("{runs} random runs with {violations} close pairs; all classes anchored in {covered}/10 seeds"),
    )
}

fn recovery_config() -> ExperimentConfig {
    ExperimentConfig::new(DatasetSource::Synthetic {
        k: 3,
        n: 300,
        dims: vec![10, 15],
        separation: 6.0,
        seed: None,
    })
}

/// Both arms for each (align rate, seed), in seed order.
fn paired_runs(rates: &[f64], seeds: u64) -> Vec<(f64, Vec<(RunRecord, RunRecord)>)> {
    let cfg = recovery_config();
    rates
        .iter()
        .map(|&rate| {
            let runs = (0..seeds)
                .map(|seed| {
                    let ds = load_or_generate(&cfg.dataset, seed).unwrap();
                    let mut arms = run_arms(&ds, rate, 0.5, &cfg, seed, &[true, false]).unwrap();
                    let b = arms.pop().unwrap();
                    let a = arms.pop().unwrap();
                    (a, b)
                })
                .collect();
            (rate, runs)
        })
        .collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn end_to_end_recovery() -> Outcome {
    let cfg = recovery_config();
    let start = Instant::now();
    let accs: Vec<f64> = (0..5)
        .map(|seed| {
            let ds = load_or_generate(&cfg.dataset, seed).unwrap();
            run_pipeline(&ds, 0.5, 0.5, &cfg, seed).unwrap().report.acc
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let m = mean(accs.iter().copied());
    let per: Vec<String> = accs.iter().map(|a| format!("{a:.3}")).collect();
    outcome(
        "end-to-end recovery on synthetic data",
        m >= 0.85 && secs < 60.0,
        format!("mean ACC {m:.3} (need 0.85) over seeds [{}], {secs:.1} s (limit 60 s)", per.join(", ")),
    )
}

fn ablation_direction(runs: &[(f64, Vec<(RunRecord, RunRecord)>)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (rate, pairs) in runs {
        let wins = pairs.iter().filter(|(a, b)| a.report.acc >= b.report.acc).count();
        ok &= wins >= 4;
        let sizes = &pairs[0].0.row_counts;
        parts.push(format!("align {rate}: {wins}/5 (views {sizes:?})"));
    }
    outcome("padding arm at least matches dropping arm", ok, parts.join("; "))
}

fn imbalanced_ablation_note() -> String {
    let mut cfg = recovery_config();
    cfg.view_missing_rates = Some(vec![0.5, 0.2]);
    let mut parts = Vec::new();
    for rate in [0.3, 0.5, 0.7] {
        let mut wins = 0;
        let (mut with, mut without) = (0.0, 0.0);
        for seed in 0..5 {
            let ds = load_or_generate(&cfg.dataset, seed).unwrap();
            let arms = run_arms(&ds, rate, 0.5, &cfg, seed, &[true, false]).unwrap();
            wins += usize::from(arms[0].report.acc >= arms[1].report.acc);
            with += arms[0].report.acc / 5.0;
            without += arms[1].report.acc / 5.0;
        }
        parts.push(format!("align {rate}: {wins}/5, mean {with:.3} vs {without:.3}"));
    }
    parts.join("; ")
}

fn align_rate_monotonicity(runs: &[(f64, Vec<(RunRecord, RunRecord)>)]) -> Outcome {
    let at = |r: f64| {
        let (_, pairs) = runs.iter().find(|(rate, _)| *rate == r).unwrap();
        mean(pairs.iter().map(|(a, _)| a.report.acc))
    };
    let (low, high) = (at(0.3), at(0.7));
    outcome(
        "accuracy does not drop from align 0.3 to 0.7",
        high >= low,
        format!("mean ACC {high:.3} at 0.7 vs {low:.3} at 0.3"),
    )
}

fn anchor_search_scaling() -> Outcome {
    let sizes = [500, 1000, 2000];
    let mut medians = Vec::new();
    let mut backends = Vec::new();
    for &n in &sizes {
        let ds = generate_synthetic(&SyntheticSpec {
            k: 3,
            n,
            dims: vec![10, 15],
            separation: 6.0,
            seed: 9,
        })
        .unwrap();
        let plan = make_corruption_plan(&ds, 1.0, 0.0, 9).unwrap();
        let corrupted = apply_corruption(&ds, &plan).unwrap();
        let n_a = default_anchor_count(3, n);
        let cfg = WalkConfig::default();
        let warm = select_anchors(&corrupted, n_a, None, &cfg).unwrap();
        backends.push(format!("{:?}", warm.backends[0]));
        let mut times: Vec<f64> = (0..5)
            .map(|_| {
                let t = Instant::now();
                let set = select_anchors(&corrupted, n_a, None, &cfg).unwrap();
                std::hint::black_box(set);
                t.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        medians.push(times[2]);
    }
    let r1 = medians[1] / medians[0];
    let r2 = medians[2] / medians[1];
    outcome(
        "anchor search grows subquadratically",
        r1 <= 3.2 && r2 <= 3.2,
        format!(
            "median {:.1}/{:.1}/{:.1} ms at n=500/1000/2000, ratios {r1:.2} and {r2:.2} (limit 3.2), walk kernels {}",
            medians[0] * 1e3,
            medians[1] * 1e3,
            medians[2] * 1e3,
            backends.join("/")
        ),
    )
}

fn metric_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let truth: Vec<usize> = (0..200).map(|_| rng.random_range(0..5)).collect();
    let r = evaluate(&truth, &truth, 0, 5).unwrap();
    let identity = (r.acc, r.nmi, r.ari, r.f1_weighted) == (1.0, 1.0, 1.0, 1.0);

    let mut invariant = true;
    for _ in 0..100 {
        let n = rng.random_range(10..200);
        let k = rng.random_range(2..6);
        let t: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut relabel: Vec<usize> = (0..k).collect();
        relabel.shuffle(&mut rng);
        let q: Vec<usize> = p.iter().map(|&c| relabel[c]).collect();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        invariant &= close(accuracy(&p, &t).unwrap(), accuracy(&q, &t).unwrap())
            && close(nmi(&p, &t).unwrap(), nmi(&q, &t).unwrap())
            && close(ari(&p, &t).unwrap(), ari(&q, &t).unwrap())
            && close(f1_weighted(&p, &t).unwrap(), f1_weighted(&q, &t).unwrap());
    }

    let aris: Vec<f64> = (0..100)
        .map(|_| {
            let a: Vec<usize> = (0..1000).map(|_| rng.random_range(0..4)).collect();
            let b: Vec<usize> = (0..1000).map(|_| rng.random_range(0..4)).collect();
            ari(&a, &b).unwrap()
        })
        .collect();
    let ari_mean = mean(aris.iter().copied());
    outcome(
        "clustering metric sanity",
        identity && invariant && ari_mean.abs() <= 0.05,
        format!(
            "identity scores 1: {identity}; relabel invariant on 100 instances: {invariant}; \
             random-pair ARI mean {ari_mean:+.4} (limit 0.05)"
        ),
    )
}

fn main() {
    let mut results = vec![
        hungarian_vs_brute_force(),
        gradient_check(),
        stochasticity_invariants(),
        walk_power_oracle(),
        greedy_separation_and_coverage(),
        end_to_end_recovery(),
    ];
    let runs = paired_runs(&[0.3, 0.5, 0.7], 5);
    results.push(ablation_direction(&runs));
    results.push(align_rate_monotonicity(&runs));
    results.push(anchor_search_scaling());
    results.push(metric_sanity());

    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        println!("[{}] {:>2}. {}: {}", if r.pass { "PASS" } else { "FAIL" }, i + 1, r.name, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("note: with separate view missing rates (0.5, 0.2) the padding arm wins {}", imbalanced_ablation_note());
    println!("{} of {} checks passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
