//! Seeded synthetic datasets, so experiments need no downloads.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::GraphError;
use crate::graph::Dataset;

/// Parameters of the Gaussian-mixture generator.
///
/// Defaults give the benchmark used throughout the tests: 5 clusters,
/// 2000 points in 50 dimensions, centers spread widely enough that the
/// clusters are linearly separable.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub n_clusters: usize,
    pub n_total: usize,
    pub n_dims: usize,
    /// per-coordinate standard deviation within a cluster
    pub cluster_std: f64,
    /// per-coordinate standard deviation of the cluster centers
    pub center_std: f64,
    pub seed: u64,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            n_clusters: 5,
            n_total: 2000,
            n_dims: 50,
            cluster_std: 1.0,
            center_std: 2.5,
            seed: 42,
        }
    }
}

/// Draw an isotropic Gaussian mixture with labels in contiguous
/// ascending blocks (cluster c gets label c). Cluster sizes differ by
/// at most one when `n_total` is not a multiple of `n_clusters`; the
/// remainder goes to the earliest clusters.
pub fn make_gaussian_mixture(cfg: &MixtureConfig) -> Result<Dataset, GraphError> {
    if cfg.n_clusters == 0 {
        return Err(GraphError::Param("need at least one cluster".into()));
    }
    if cfg.n_total < 2 * cfg.n_clusters {
        return Err(GraphError::Param(format!(
            "need at least 2 points per cluster, got {} for {} clusters",
            cfg.n_total, cfg.n_clusters
        )));
    }
    if cfg.n_dims == 0 {
        return Err(GraphError::Param("need at least one dimension".into()));
    }
    if !(cfg.cluster_std > 0.0 && cfg.cluster_std.is_finite()) {
        return Err(GraphError::Param(format!(
            "cluster_std must be positive, got {}",
            cfg.cluster_std
        )));
    }
    if !(cfg.center_std > 0.0 && cfg.center_std.is_finite()) {
        return Err(GraphError::Param(format!(
            "center_std must be positive, got {}",
            cfg.center_std
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = StandardNormal;
    let centers = Array2::from_shape_fn((cfg.n_clusters, cfg.n_dims), |_| {
        let z: f64 = normal.sample(&mut rng);
        cfg.center_std * z
    });
    let base = cfg.n_total / cfg.n_clusters;
    let extra = cfg.n_total % cfg.n_clusters;
    let mut x = Array2::zeros((cfg.n_total, cfg.n_dims));
    let mut labels = Vec::with_capacity(cfg.n_total);
    let mut row = 0usize;
    for c in 0..cfg.n_clusters {
        let size = base + usize::from(c < extra);
        for _ in 0..size {
            for d in 0..cfg.n_dims {
                let z: f64 = normal.sample(&mut rng);
                x[[row, d]] = centers[[c, d]] + cfg.cluster_std * z;
            }
            labels.push(c as i64);
            row += 1;
        }
    }
    Dataset::new(x, Some(labels))
}
