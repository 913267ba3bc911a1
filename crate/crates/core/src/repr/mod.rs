//! Noise-contrastive representation learning on the aligned block.

mod encoder;
mod loss;

pub use encoder::{encode, init_encoders, loss_gradient, train_encoders, EncoderParams, TrainedEncoders};
pub use loss::{
    contrastive_loss, cosine_distance, euclidean_distance, noise_contrastive_loss, sample_pair_indices,
    sample_pairs, LossConfig, PairBatch,
};

/// Default latent width: `min(anchors, 64)`.
pub fn default_latent_width(anchors: usize) -> usize {
    anchors.clamp(1, 64)
}
