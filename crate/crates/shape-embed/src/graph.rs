//! High-dimensional neighborhood structures feeding the optimizer.
//!
//! Three stages: exact k-nearest neighbors by full scan, directed
//! affinities with a per-point scale calibrated so every point sees the
//! same effective neighborhood mass, and probabilistic-sum
//! symmetrization into the undirected [`AffinityGraph`] the optimizer
//! consumes. A separate path builds the three self-tuned pair sets
//! (near, mid-near, further) used by the mid-near channel experiments.
//!
//! Everything here is deterministic: ties break by index, sampling is
//! seeded, and construction order is fixed.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

/// Input points plus optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, labels: Option<Vec<i64>>) -> Result<Self, GraphError> {
        if x.nrows() < 2 {
            return Err(GraphError::Param(format!(
                "need at least 2 points, got {}",
                x.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::Param("data contains non-finite entries".into()));
        }
        if let Some(l) = &labels {
            if l.len() != x.nrows() {
                return Err(GraphError::Param(format!(
                    "{} labels for {} points",
                    l.len(),
                    x.nrows()
                )));
            }
        }
        Ok(Self { x, labels })
    }

    pub fn n_points(&self) -> usize {
        self.x.nrows()
    }
}

fn euclidean(x: &Array2<f64>, i: usize, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(x.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Per-point neighbor lists, ascending by (distance, index).
#[derive(Debug, Clone, PartialEq)]
pub struct KnnIndex {
    pub k: usize,
    /// `neighbors[i]` holds k `(j, distance)` entries, self excluded.
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

/// Exact Euclidean k-nearest neighbors by full pairwise scan.
/// Ties break toward the lower index.
pub fn exact_knn(data: &Dataset, k: usize) -> Result<KnnIndex, GraphError> {
    let n = data.n_points();
    if k < 1 {
        return Err(GraphError::Param("k must be at least 1".into()));
    }
    if k >= n {
        return Err(GraphError::Param(format!("k = {k} must be below N = {n}")));
    }
    let mut neighbors = Vec::with_capacity(n);
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        scratch.clear();
        for j in 0..n {
            if j != i {
                scratch.push((euclidean(&data.x, i, j), j));
            }
        }
        // total order: distances are finite, ties fall to the index
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        neighbors.push(scratch[..k].iter().map(|&(d, j)| (j, d)).collect());
    }
    Ok(KnnIndex { k, neighbors })
}

const SIGMA_LO: f64 = 1e-12;
const SIGMA_HI: f64 = 1e12;

/// Directed neighbor weights before symmetrization, with the per-point
/// calibration byproducts.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedAffinities {
    pub k: usize,
    /// distance to the nearest neighbor of each point
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    /// calibration could not bite: all neighbor distances equal, or a
    /// duplicate point (rho = 0)
    pub degenerate: Vec<bool>,
    /// `weights[i]` holds `(j, w)` for each neighbor j of i
    pub weights: Vec<Vec<(usize, f64)>>,
}

/// Turn neighbor distances into directed weights
/// `exp(-(d - rho_i) / sigma_i)`, calibrating each `sigma_i` by
/// bisection so the weights sum to `log2(k)`.
///
/// The nearest neighbor always gets weight 1. 64 bisection steps on
/// [1e-12, 1e12] put the sum within 1e-5 of the target wherever the
/// target is attainable; a point whose neighbor distances are all equal
/// makes the sum constant in `sigma`, so it is flagged and given the
/// bracket midpoint (weights all 1). Duplicate points (rho = 0) are
/// flagged too but calibrate normally.
pub fn umap_affinities(knn: &KnnIndex, k: usize) -> Result<DirectedAffinities, GraphError> {
    if k != knn.k {
        return Err(GraphError::Param(format!(
            "index was built with k = {}, asked for {k}",
            knn.k
        )));
    }
    let n = knn.neighbors.len();
    let target = (k as f64).log2();
    let mut rho = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut degenerate = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for nbrs in &knn.neighbors {
        let r = nbrs[0].1;
        let d_max = nbrs[nbrs.len() - 1].1;
        let flat = d_max == r;
        let s = if flat {
            // the weight sum is k for every sigma; nothing to solve
            0.5 * (SIGMA_LO + SIGMA_HI)
        } else {
            let (mut lo, mut hi) = (SIGMA_LO, SIGMA_HI);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let sum: f64 = nbrs.iter().map(|&(_, d)| (-(d - r) / mid).exp()).sum();
                if sum > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        weights.push(
            nbrs.iter()
                .map(|&(j, d)| (j, (-(d - r) / s).exp()))
                .collect(),
        );
        degenerate.push(flat || r == 0.0);
        rho.push(r);
        sigma.push(s);
    }
    Ok(DirectedAffinities {
        k,
        rho,
        sigma,
        degenerate,
        weights,
    })
}

/// The undirected affinity graph the optimizer runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    pub n: usize,
    pub k: usize,
    /// `(i, j, p)` with i < j, at most one edge per pair, p in (0, 1]
    pub edges: Vec<(usize, usize, f64)>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl AffinityGraph {
    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).fold(0.0, f64::max)
    }
}

/// Symmetrize directed weights with the probabilistic sum
/// `p + q - p q`. Pairs whose combined weight is zero are dropped.
pub fn symmetrize_tconorm(dir: &DirectedAffinities) -> Result<AffinityGraph, GraphError> {
    let n = dir.weights.len();
    let mut directed = vec![Vec::new(); n];
    for (i, nbrs) in dir.weights.iter().enumerate() {
        for &(j, w) in nbrs {
            if !(0.0..=1.0).contains(&w) {
                return Err(GraphError::Range(format!(
                    "weight {w} on ({i}, {j}) is outside [0, 1]"
                )));
            }
            directed[i].push((j, w));
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for &(j, w_ij) in &directed[i] {
            if j < i {
                // handled from the other side
                continue;
            }
            let w_ji = directed[j]
                .iter()
                .find(|&&(t, _)| t == i)
                .map(|&(_, w)| w)
                .unwrap_or(0.0);
            let p = w_ij + w_ji - w_ij * w_ji;
            if p > 0.0 {
                edges.push((i, j, p));
            }
        }
        // pairs seen only from the j side
        for &(j, w_ji) in &directed[i] {
            if j < i && !directed[j].iter().any(|&(t, _)| t == i) && w_ji > 0.0 {
                edges.push((j, i, w_ji));
            }
        }
    }
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(AffinityGraph {
        n,
        k: dir.k,
        edges,
        rho: dir.rho.clone(),
        sigma: dir.sigma.clone(),
        degenerate: dir.degenerate.clone(),
    })
}

/// The three pair families of the self-tuned sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct PacmapPairs {
    /// `(i, j)` per anchor i, closest first by scaled distance
    pub near: Vec<(usize, usize)>,
    pub mid_near: Vec<(usize, usize)>,
    pub further: Vec<(usize, usize)>,
    /// mean distance to the 4th..6th neighbor of each point
    pub sigma: Vec<f64>,
}

/// Build near / mid-near / further pair sets.
///
/// Near pairs rank by the self-tuned squared distance
/// `d^2 / (sigma_i sigma_j)`; mid-near pairs sample 6 candidates
/// uniformly and keep the 2nd-closest in plain Euclidean distance,
/// repeated `n_mn` times per anchor; further pairs are uniform samples
/// outside everything already chosen. The three sets stay disjoint per
/// anchor, and the same seed reproduces them exactly.
pub fn pacmap_pairs(
    data: &Dataset,
    n_nb: usize,
    n_mn: usize,
    n_fp: usize,
    seed: u64,
) -> Result<PacmapPairs, GraphError> {
    let n = data.n_points();
    if n < 7 {
        return Err(GraphError::Param(format!(
            "self-tuned scales need 6 neighbors, got N = {n}"
        )));
    }
    if n_nb == 0 || n_nb + 1 >= n {
        return Err(GraphError::Param(format!(
            "need 1 <= n_nb < N - 1, got n_nb = {n_nb}, N = {n}"
        )));
    }
    // every anchor must leave room for its samples outside the near set
    let spare = n - 1 - n_nb;
    if n_mn > 0 && spare < 6 {
        return Err(GraphError::Param(format!(
            "mid-near sampling needs 6 candidates, only {spare} outside the near set"
        )));
    }
    if spare < n_mn + n_fp {
        return Err(GraphError::Param(format!(
            "cannot draw {n_mn} mid-near + {n_fp} further pairs from {spare} candidates"
        )));
    }

    let knn6 = exact_knn(data, 6)?;
    let sigma: Vec<f64> = knn6
        .neighbors
        .iter()
        .map(|nbrs| (nbrs[3].1 + nbrs[4].1 + nbrs[5].1) / 3.0)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut near = Vec::with_capacity(n * n_nb);
    let mut mid_near = Vec::with_capacity(n * n_mn);
    let mut further = Vec::with_capacity(n * n_fp);
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        scratch.clear();
        for j in 0..n {
            if j != i {
                let d = euclidean(&data.x, i, j);
                scratch.push((d * d / (sigma[i] * sigma[j]), j));
            }
        }
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let anchor_near: Vec<usize> = scratch[..n_nb].iter().map(|&(_, j)| j).collect();
        near.extend(anchor_near.iter().map(|&j| (i, j)));

        let mut taken: Vec<bool> = vec![false; n];
        taken[i] = true;
        for &j in &anchor_near {
            taken[j] = true;
        }
        for _ in 0..n_mn {
            let pool: Vec<usize> = (0..n).filter(|&j| !taken[j]).collect();
            let picks = sample(&mut rng, pool.len(), 6);
            let mut cands: Vec<(f64, usize)> = picks
                .iter()
                .map(|p| (euclidean(&data.x, i, pool[p]), pool[p]))
                .collect();
            cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let second = cands[1].1;
            mid_near.push((i, second));
            taken[second] = true;
        }
        for _ in 0..n_fp {
            let pool: Vec<usize> = (0..n).filter(|&j| !taken[j]).collect();
            let pick = pool[sample(&mut rng, pool.len(), 1).index(0)];
            further.push((i, pick));
            taken[pick] = true;
        }
    }
    Ok(PacmapPairs {
        near,
        mid_near,
        further,
        sigma,
    })
}
