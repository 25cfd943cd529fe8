//! Embedding quality measures: neighborhood preservation, label
//! separation, classification transfer, and run-to-run alignment.
//!
//! All distances are Euclidean and all rank ties break toward the
//! lower index, so every number here is deterministic for a given
//! seed.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::MetricsError;

fn check_same_points(a: &Array2<f64>, b: &Array2<f64>) -> Result<(), MetricsError> {
    if a.nrows() != b.nrows() {
        return Err(MetricsError::Dimension(format!(
            "point counts differ: {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

fn dist(m: &Array2<f64>, i: usize, j: usize) -> f64 {
    m.row(i)
        .iter()
        .zip(m.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Neighbors of `i` ascending by (distance, index), self excluded.
fn sorted_others(m: &Array2<f64>, i: usize) -> Vec<(f64, usize)> {
    let mut v: Vec<(f64, usize)> = (0..m.nrows())
        .filter(|&j| j != i)
        .map(|j| (dist(m, i, j), j))
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// How well the embedding `y` preserves the k-neighborhoods of `x`:
/// 1 minus a normalized penalty for embedding-neighbors that sit deep
/// in the original ranking. 1.0 means every embedding neighbor was
/// already a true neighbor. `sample_size` restricts the anchor points
/// (seeded, without replacement); neighbor pools always span the full
/// dataset.
pub fn trustworthiness(
    x: &Array2<f64>,
    y: &Array2<f64>,
    k: usize,
    sample_size: Option<usize>,
    seed: u64,
) -> Result<f64, MetricsError> {
    check_same_points(x, y)?;
    let n = x.nrows();
    if k < 1 || 2 * k >= n {
        return Err(MetricsError::Param(format!(
            "need 1 <= k < N/2, got k = {k}, N = {n}"
        )));
    }
    let anchors: Vec<usize> = match sample_size {
        Some(s) if s < n => {
            if s == 0 {
                return Err(MetricsError::Param("sample_size must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = rand::seq::index::sample(&mut rng, n, s).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..n).collect(),
    };
    let mut penalty = 0.0;
    for &i in &anchors {
        // rank of every point in the original space, nearest = 1
        let mut rank = vec![0usize; n];
        for (r, &(_, j)) in sorted_others(x, i).iter().enumerate() {
            rank[j] = r + 1;
        }
        for &(_, j) in sorted_others(y, i).iter().take(k) {
            penalty += rank[j].saturating_sub(k) as f64;
        }
    }
    let n_s = anchors.len() as f64;
    let norm = 2.0 / (n_s * k as f64 * (2 * n - 3 * k - 1) as f64);
    Ok(1.0 - norm * penalty)
}

/// Mean silhouette over all points: (b - a) / max(a, b) with a the
/// mean intra-class distance and b the nearest other class's mean.
/// A point at distance 0 from both (a = b = 0) scores 0.
pub fn silhouette(y: &Array2<f64>, labels: &[i64]) -> Result<f64, MetricsError> {
    let n = y.nrows();
    if labels.len() != n {
        return Err(MetricsError::Dimension(format!(
            "{} labels for {n} points",
            labels.len()
        )));
    }
    let mut classes: Vec<i64> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(MetricsError::Label("need at least 2 classes".into()));
    }
    for c in &classes {
        let count = labels.iter().filter(|&&l| l == *c).count();
        if count < 2 {
            return Err(MetricsError::Label(format!(
                "class {c} has a single member"
            )));
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut sums: Vec<(f64, usize)> = vec![(0.0, 0); classes.len()];
        for j in 0..n {
            if j == i {
                continue;
            }
            let c = classes.binary_search(&labels[j]).expect("seen label");
            sums[c].0 += dist(y, i, j);
            sums[c].1 += 1;
        }
        let own = classes.binary_search(&labels[i]).expect("seen label");
        let a = sums[own].0 / sums[own].1 as f64;
        let b = sums
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != own)
            .map(|(_, &(s, cnt))| s / cnt as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        total += if denom == 0.0 { 0.0 } else { (b - a) / denom };
    }
    Ok(total / n as f64)
}

/// Fraction of test points whose k-nearest-neighbor majority vote in
/// the training set matches their label. Vote ties go to the smallest
/// label id.
pub fn knn_accuracy(
    train: &Array2<f64>,
    train_labels: &[i64],
    test: &Array2<f64>,
    test_labels: &[i64],
    k: usize,
) -> Result<f64, MetricsError> {
    let n_train = train.nrows();
    if train_labels.len() != n_train || test_labels.len() != test.nrows() {
        return Err(MetricsError::Dimension(
            "label counts do not match point counts".into(),
        ));
    }
    if train.ncols() != test.ncols() {
        return Err(MetricsError::Dimension(format!(
            "train has {} dims, test has {}",
            train.ncols(),
            test.ncols()
        )));
    }
    if k < 1 || k > n_train {
        return Err(MetricsError::Param(format!(
            "need 1 <= k <= N_train, got k = {k}, N_train = {n_train}"
        )));
    }
    let mut correct = 0usize;
    for (t, &truth) in test_labels.iter().enumerate() {
        let mut nbrs: Vec<(f64, usize)> = (0..n_train)
            .map(|j| {
                let d = train
                    .row(j)
                    .iter()
                    .zip(test.row(t).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (d, j)
            })
            .collect();
        nbrs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut votes: std::collections::BTreeMap<i64, usize> = Default::default();
        for &(_, j) in nbrs.iter().take(k) {
            *votes.entry(train_labels[j]).or_insert(0) += 1;
        }
        // BTreeMap iterates labels ascending, so strict > keeps the
        // smallest label among tied counts
        let mut best = (i64::MIN, 0usize);
        for (&label, &count) in &votes {
            if count > best.1 {
                best = (label, count);
            }
        }
        if best.0 == truth {
            correct += 1;
        }
    }
    Ok(correct as f64 / test_labels.len() as f64)
}

/// Center a cloud and scale it to unit Frobenius norm.
fn normalize(m: &Array2<f64>) -> Result<Array2<f64>, MetricsError> {
    let n = m.nrows() as f64;
    let mut out = m.clone();
    for c in 0..m.ncols() {
        let mean = m.column(c).sum() / n;
        out.column_mut(c).mapv_inplace(|v| v - mean);
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(MetricsError::Degenerate(
            "cloud has zero variance after centering".into(),
        ));
    }
    out.mapv_inplace(|v| v / norm);
    Ok(out)
}

/// Residual distance between two clouds after removing translation,
/// rotation, reflection, and scale from both. 0 means the clouds are
/// the same shape; the value never exceeds 1.
pub fn procrustes_distance(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64, MetricsError> {
    check_same_points(a, b)?;
    if a.ncols() != b.ncols() {
        return Err(MetricsError::Dimension(format!(
            "dims differ: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let ah = normalize(a)?;
    let bh = normalize(b)?;
    let c = ah.t().dot(&bh);
    let d = c.nrows();
    let cm = nalgebra::DMatrix::from_fn(d, d, |r, col| c[[r, col]]);
    // best orthogonal alignment keeps exactly the nuclear norm of the
    // cross-covariance; residual^2 = 1 - s^2 for unit-norm clouds
    let s: f64 = cm.svd(false, false).singular_values.iter().sum();
    Ok((1.0 - s * s).max(0.0).sqrt())
}

/// Pairwise alignment distances for repeated runs against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcrustesMatrix {
    /// original run indices in diagonal-ascending order
    pub order: Vec<usize>,
    /// diagonal = distance to the reference, off-diagonal = run-to-run
    pub m: Array2<f64>,
    /// mean over the strict lower triangle
    pub mean: f64,
    /// population standard deviation over the same entries
    pub std: f64,
}

/// Align every run against the reference and against each other.
/// Runs are reordered so the diagonal ascends.
pub fn procrustes_matrix(
    reference: &Array2<f64>,
    runs: &[Array2<f64>],
) -> Result<ProcrustesMatrix, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::Param("no runs given".into()));
    }
    let mut diag: Vec<(f64, usize)> = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        diag.push((procrustes_distance(reference, run)?, i));
    }
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let order: Vec<usize> = diag.iter().map(|&(_, i)| i).collect();
    let r = runs.len();
    let mut m = Array2::zeros((r, r));
    for i in 0..r {
        m[[i, i]] = diag[i].0;
        for j in 0..i {
            let d = procrustes_distance(&runs[order[i]], &runs[order[j]])?;
            m[[i, j]] = d;
            m[[j, i]] = d;
        }
    }
    let lower: Vec<f64> = (0..r)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| m[[i, j]])
        .collect();
    let (mean, std) = if lower.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = lower.iter().sum::<f64>() / lower.len() as f64;
        let var = lower.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / lower.len() as f64;
        (mean, var.sqrt())
    };
    Ok(ProcrustesMatrix {
        order,
        m,
        mean,
        std,
    })
}
