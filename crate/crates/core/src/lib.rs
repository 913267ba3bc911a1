//! Clustering for multi-view data whose views are both incomplete (unequal
//! sample counts) and misaligned (cross-view correspondence shuffled).
//!
//! The pipeline runs in five stages:
//!
//! 1. [`data`]: load or generate views, then simulate misalignment and
//!    missing rows with a seeded [`data::CorruptionPlan`].
//! 2. [`anchor`]: score samples with a self-repellent random walk over the
//!    cosine graph, pick well-separated anchors greedily, and re-represent
//!    every view as similarities to the anchors.
//! 3. [`repr`]: train a shallow encoder per view with a noise-contrastive
//!    loss on the aligned block.
//! 4. [`align`]: match the views with the Hungarian algorithm, pad the short
//!    view with Gaussian-kernel interpolated rows at the largest similarity
//!    gaps, realign, and fuse.
//! 5. [`cluster`]: k-means on the fused features, scored with ACC, NMI, ARI
//!    and weighted F1.
//!
//! [`experiment`] wires the stages together and handles configuration,
//! ablations and report files.

pub mod align;
pub mod anchor;
pub mod cluster;
pub mod data;
mod error;
pub mod experiment;
pub mod repr;
pub(crate) mod util;

pub use error::{Error, Result};
