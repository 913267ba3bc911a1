use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::Serialize;

use super::loss::{noise_term, noise_term_grad, sample_pair_indices, LossConfig, PairBatch};
use crate::util::{self, dot, norm, StdRng};
use crate::{Error, Result};

/// Two affine layers with a ReLU between them:
/// `y = W2^T relu(W1^T x + b1) + b2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncoderParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl EncoderParams {
    pub fn zeros(input: usize, hidden: usize, latent: usize) -> Self {
        EncoderParams {
            w1: Array2::zeros((input, hidden)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, latent)),
            b2: Array1::zeros(latent),
        }
    }

    /// Uniform(-s, s) weights and biases with `s = 1 / sqrt(fan_in)`.
    pub fn random(input: usize, hidden: usize, latent: usize, rng: &mut StdRng) -> Self {
        let mut p = Self::zeros(input, hidden, latent);
        let s1 = 1.0 / (input as f64).sqrt();
        let s2 = 1.0 / (hidden as f64).sqrt();
        p.w1.mapv_inplace(|_| rng.random_range(-s1..s1));
        p.b1.mapv_inplace(|_| rng.random_range(-s1..s1));
        p.w2.mapv_inplace(|_| rng.random_range(-s2..s2));
        p.b2.mapv_inplace(|_| rng.random_range(-s2..s2));
        p
    }

    pub fn input_width(&self) -> usize {
        self.w1.nrows()
    }

    pub fn latent_width(&self) -> usize {
        self.w2.ncols()
    }

    /// All parameters in a fixed order (w1, b1, w2, b2; row-major).
    pub fn flatten(&self) -> Vec<f64> {
        self.w1
            .iter()
            .chain(self.b1.iter())
            .chain(self.w2.iter())
            .chain(self.b2.iter())
            .copied()
            .collect()
    }

    /// Inverse of [`flatten`](Self::flatten), reusing `self`'s shapes.
    pub fn with_flat(&self, flat: &[f64]) -> Self {
        let mut out = self.clone();
        let mut it = flat.iter().copied();
        for v in out
            .w1
            .iter_mut()
            .chain(out.b1.iter_mut())
            .chain(out.w2.iter_mut())
            .chain(out.b2.iter_mut())
        {
            *v = it.next().expect("flat parameter vector too short");
        }
        out
    }

    fn step(&mut self, grad: &EncoderParams, lr: f64) {
        self.w1.scaled_add(-lr, &grad.w1);
        self.b1.scaled_add(-lr, &grad.b1);
        self.w2.scaled_add(-lr, &grad.w2);
        self.b2.scaled_add(-lr, &grad.b2);
    }

    fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }
}

struct Forward {
    pre: Array2<f64>,
    hidden: Array2<f64>,
    out: Array2<f64>,
}

fn forward(p: &EncoderParams, x: ArrayView2<f64>) -> Result<Forward> {
    if x.ncols() != p.input_width() {
        return Err(Error::shape(format!(
            "encoder expects {} inputs, got {}",
            p.input_width(),
            x.ncols()
        )));
    }
    let pre = x.dot(&p.w1) + &p.b1;
    let hidden = pre.mapv(|v| v.max(0.0));
    let out = hidden.dot(&p.w2) + &p.b2;
    Ok(Forward { pre, hidden, out })
}

/// Latent rows for every input row.
pub fn encode(p: &EncoderParams, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(forward(p, x)?.out)
}

fn backward(p: &EncoderParams, x: ArrayView2<f64>, f: &Forward, d_out: &Array2<f64>) -> EncoderParams {
    let w2 = f.hidden.t().dot(d_out);
    let b2 = d_out.sum_axis(Axis(0));
    let mut d_pre = d_out.dot(&p.w2.t());
    Zip::from(&mut d_pre).and(&f.pre).for_each(|g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
    EncoderParams {
        w1: x.t().dot(&d_pre),
        b1: d_pre.sum_axis(Axis(0)),
        w2,
        b2,
    }
}

/// Gradients of the noise-contrastive loss w.r.t. the latent rows of both
/// sides, plus the loss itself.
fn latent_gradients(
    left: &Array2<f64>,
    right: &Array2<f64>,
    labels: &[bool],
    cfg: &LossConfig,
) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    let n = labels.len() as f64;
    let mut loss = 0.0;
    let mut gl = Array2::zeros(left.raw_dim());
    let mut gr = Array2::zeros(right.raw_dim());
    for (r, &pos) in labels.iter().enumerate() {
        let (u, v) = (left.row(r), right.row(r));
        let (nu, nv) = (norm(u), norm(v));
        if nu == 0.0 || nv == 0.0 {
            return Err(Error::degenerate(format!("zero latent vector in pair {r}")));
        }
        let c = dot(u, v) / (nu * nv);
        let d = 1.0 - c;
        loss += noise_term(d, pos, cfg.margin, cfg.a);
        let coef = noise_term_grad(d, pos, cfg.margin, cfg.a) / (2.0 * n);
        if coef == 0.0 {
            continue;
        }
        // dD/du = -(v / (|u||v|) - c u / |u|^2)
        let mut row = gl.row_mut(r);
        row.scaled_add(-coef / (nu * nv), &v);
        row.scaled_add(coef * c / (nu * nu), &u);
        let mut row = gr.row_mut(r);
        row.scaled_add(-coef / (nu * nv), &u);
        row.scaled_add(coef * c / (nv * nv), &v);
    }
    Ok((loss / (2.0 * n), gl, gr))
}

/// Loss and exact gradients for both encoders. `batch.left` feeds the first
/// encoder, `batch.right` the second.
pub fn loss_gradient(
    p1: &EncoderParams,
    p2: &EncoderParams,
    batch: &PairBatch,
    cfg: &LossConfig,
) -> Result<(f64, EncoderParams, EncoderParams)> {
    let f1 = forward(p1, batch.left())?;
    let f2 = forward(p2, batch.right())?;
    let (loss, g1, g2) = latent_gradients(&f1.out, &f2.out, batch.labels(), cfg)?;
    Ok((loss, backward(p1, batch.left(), &f1, &g1), backward(p2, batch.right(), &f2, &g2)))
}

/// Pair of trained encoders and the loss before every update.
#[derive(Debug, Clone, Serialize)]
pub struct TrainedEncoders {
    pub first: EncoderParams,
    pub second: EncoderParams,
    pub losses: Vec<f64>,
}

/// Seeded initial weights for both encoders, hidden width `2 * latent`.
pub fn init_encoders(input1: usize, input2: usize, latent: usize, seed: u64) -> (EncoderParams, EncoderParams) {
    let mut rng = util::rng(seed);
    let first = EncoderParams::random(input1, 2 * latent, latent, &mut rng);
    let second = EncoderParams::random(input2, 2 * latent, latent, &mut rng);
    (first, second)
}

/// Full-batch gradient descent on aligned-block pairs for `cfg.epochs`
/// epochs.
pub fn train_encoders(
    aligned1: ArrayView2<f64>,
    aligned2: ArrayView2<f64>,
    cfg: &LossConfig,
    latent: usize,
) -> Result<TrainedEncoders> {
    cfg.validate()?;
    if aligned1.nrows() != aligned2.nrows() {
        return Err(Error::shape("aligned blocks differ in row count"));
    }
    if latent == 0 {
        return Err(Error::invalid("latent width must be >= 1"));
    }
    let (pairs, labels) = sample_pair_indices(aligned1.nrows(), cfg.neg_ratio, cfg.seed)?;
    let li: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let ri: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let batch = PairBatch::new(aligned1.select(Axis(0), &li), aligned2.select(Axis(0), &ri), labels)?;

    let (mut first, mut second) = init_encoders(aligned1.ncols(), aligned2.ncols(), latent, cfg.seed);
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, g1, g2) = loss_gradient(&first, &second, &batch, cfg)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        losses.push(loss);
        first.step(&g1, cfg.learning_rate);
        second.step(&g2, cfg.learning_rate);
        if !first.is_finite() || !second.is_finite() {
            return Err(Error::Diverged { epoch, loss: f64::NAN });
        }
    }
    Ok(TrainedEncoders { first, second, losses })
}
