//! K-means on fused features and clustering metrics.

mod kmeans;
mod metrics;

pub use kmeans::{kmeans, KMeansFit};
pub use metrics::{accuracy, ari, evaluate, f1_weighted, nmi, ClusteringReport};
