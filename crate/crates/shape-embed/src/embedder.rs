//! The negative-sampling optimizer: initialization, weight-scheduled
//! edge firing, and the attraction / repulsion / mid-near channels
//! with pluggable force shapes.
//!
//! Per epoch, each positive edge fires when its weight-proportional
//! accumulator comes due (period `max_weight / p`, so the heaviest
//! edge fires every epoch). A firing edge applies one symmetric
//! attraction update, then draws `negatives_per_positive` uniform
//! partners (re-drawn only on hitting the anchor itself) for one-sided
//! repulsion updates. Mid-near pairs, when configured, fire every
//! epoch after the edge phase. Every per-coordinate contribution
//! `coefficient * (y_i - y_j)` is clipped to `[-clip, clip]` before it
//! is applied.
//!
//! Single-threaded runs are bit-deterministic for a fixed seed. The
//! optional parallel mode processes firing edges concurrently with
//! unsynchronized (race-tolerant) writes and is therefore only
//! statistically reproducible; it is never the default.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EmbedError;
use crate::graph::{exact_knn, symmetrize_tconorm, umap_affinities, AffinityGraph, Dataset};
use crate::metrics::{procrustes_matrix, silhouette, trustworthiness, ProcrustesMatrix};
use crate::shapes::{eval_shape, ShapeSpec, SignClass};

/// Default spread of both initializers (max extent for PCA, standard
/// deviation for random init).
pub const INIT_SPREAD: f64 = 10.0;

/// Neighborhood size used for the trustworthiness column of sweep
/// tables.
pub const SWEEP_TRUST_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    LinearAnneal,
}

/// Per-channel learning-rate schedule; `LinearAnneal` decays to zero
/// over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub lambda0: f64,
}

impl Schedule {
    pub fn constant(lambda0: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            lambda0,
        }
    }

    pub fn annealed(lambda0: f64) -> Self {
        Self {
            kind: ScheduleKind::LinearAnneal,
            lambda0,
        }
    }

    /// λ at epoch `t` of `epochs`; never negative.
    pub fn value(&self, t: u32, epochs: u32) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.lambda0,
            ScheduleKind::LinearAnneal => self.lambda0 * (1.0 - t as f64 / epochs as f64),
        }
    }
}

/// Optional weak-attraction channel acting on a separate pair set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidNearChannel {
    pub shape: ShapeSpec,
    pub weight: f64,
}

fn default_epochs() -> u32 {
    500
}
fn default_negatives() -> u32 {
    5
}
fn default_clip() -> f64 {
    4.0
}
fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_epochs")]
    pub epochs: u32,
    pub attraction: ShapeSpec,
    pub repulsion: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid_near: Option<MidNearChannel>,
    pub schedule_a: Schedule,
    pub schedule_r: Schedule,
    #[serde(default = "default_negatives")]
    pub negatives_per_positive: u32,
    #[serde(default = "default_clip")]
    pub clip: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub parallel: bool,
}

impl OptimizerConfig {
    /// A minimal valid configuration around the given channel shapes.
    pub fn new(attraction: ShapeSpec, repulsion: ShapeSpec) -> Self {
        Self {
            epochs: default_epochs(),
            attraction,
            repulsion,
            mid_near: None,
            schedule_a: Schedule::annealed(1.0),
            schedule_r: Schedule::annealed(1.0),
            negatives_per_positive: default_negatives(),
            clip: default_clip(),
            seed: 0,
            dim: default_dim(),
            parallel: false,
        }
    }

    fn validate(&self) -> Result<(), EmbedError> {
        if self.epochs == 0 {
            return Err(EmbedError::Param("epochs must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(EmbedError::Param("dim must be at least 1".into()));
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return Err(EmbedError::Param(format!(
                "clip must be positive and finite, got {}",
                self.clip
            )));
        }
        for (name, s) in [("schedule_a", &self.schedule_a), ("schedule_r", &self.schedule_r)] {
            if !(s.lambda0 >= 0.0 && s.lambda0.is_finite()) {
                return Err(EmbedError::Param(format!(
                    "{name}.lambda0 must be finite and non-negative, got {}",
                    s.lambda0
                )));
            }
        }
        if self.attraction.sign_class() == SignClass::Repulsive {
            return Err(EmbedError::Param(
                "attraction channel needs an attractive or mixed-sign shape".into(),
            ));
        }
        if self.repulsion.sign_class() != SignClass::Repulsive {
            return Err(EmbedError::Param(
                "repulsion channel needs a repulsive shape".into(),
            ));
        }
        if let Some(mid) = &self.mid_near {
            if !(mid.weight > 0.0 && mid.weight.is_finite()) {
                return Err(EmbedError::Param(format!(
                    "mid_near.weight must be positive and finite, got {}",
                    mid.weight
                )));
            }
            if mid.shape.sign_class() == SignClass::Repulsive {
                return Err(EmbedError::Param(
                    "mid-near channel needs an attractive or mixed-sign shape".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Stable fingerprint of a configuration, for manifests and metadata.
pub fn config_hash(cfg: &OptimizerConfig) -> String {
    crate::io::fingerprint(serde_json::to_string(cfg).expect("config serializes").as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedMeta {
    pub initializer: String,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

/// Low-dimensional point positions plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Array2<f64>,
    pub meta: EmbedMeta,
}

impl Embedding {
    pub fn from_coords(coords: Array2<f64>, initializer: &str) -> Self {
        Self {
            coords,
            meta: EmbedMeta {
                initializer: initializer.into(),
                seed: None,
                config_hash: None,
            },
        }
    }
}

/// Seeded i.i.d. Gaussian coordinates with standard deviation
/// `sigma_init`.
pub fn init_random(n: usize, d: usize, sigma_init: f64, seed: u64) -> Result<Embedding, EmbedError> {
    if n == 0 || d == 0 {
        return Err(EmbedError::Param("n and d must be positive".into()));
    }
    if !(sigma_init > 0.0 && sigma_init.is_finite()) {
        return Err(EmbedError::Param(format!(
            "sigma_init must be positive, got {sigma_init}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = Array2::from_shape_fn((n, d), |_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        sigma_init * z
    });
    let mut emb = Embedding::from_coords(coords, "random");
    emb.meta.seed = Some(seed);
    Ok(emb)
}

/// Project onto the top-d principal directions of the covariance,
/// then rescale so the largest absolute coordinate equals
/// `scale_extent` exactly.
///
/// Each component's sign is fixed by making its largest-magnitude
/// loading positive, so the result is fully deterministic.
pub fn init_pca(x: &Array2<f64>, d: usize, scale_extent: f64) -> Result<Embedding, EmbedError> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(EmbedError::Param("need at least 2 points".into()));
    }
    if d == 0 || d > p {
        return Err(EmbedError::Param(format!(
            "target dimension {d} outside 1..={p}"
        )));
    }
    if !(scale_extent > 0.0 && scale_extent.is_finite()) {
        return Err(EmbedError::Param(format!(
            "scale_extent must be positive, got {scale_extent}"
        )));
    }
    let mut xc = x.clone();
    for c in 0..p {
        let mean = x.column(c).sum() / n as f64;
        xc.column_mut(c).mapv_inplace(|v| v - mean);
    }
    let cov = xc.t().dot(&xc) / (n - 1) as f64;
    let eig = nalgebra::DMatrix::from_fn(p, p, |r, c| cov[[r, c]]).symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let lead = eig.eigenvalues[order[0]].max(0.0);
    if eig.eigenvalues[order[d - 1]] <= lead * 1e-12 || lead == 0.0 {
        return Err(EmbedError::Rank(format!(
            "covariance has fewer than {d} significant directions"
        )));
    }
    let mut comps = Array2::zeros((p, d));
    for (c, &idx) in order[..d].iter().enumerate() {
        let col = eig.eigenvectors.column(idx);
        let mut lead_row = 0;
        for r in 1..p {
            if col[r].abs() > col[lead_row].abs() {
                lead_row = r;
            }
        }
        let sign = if col[lead_row] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..p {
            comps[[r, c]] = sign * col[r];
        }
    }
    let mut y = xc.dot(&comps);
    let max_abs = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    // divide by the extremum first: its coordinate becomes exactly
    // +-1.0, so the final extent is exactly scale_extent
    y.mapv_inplace(|v| (v / max_abs) * scale_extent);
    Ok(Embedding::from_coords(y, "pca"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Attraction,
    MidNear,
    Repulsion,
}

/// One instrumented update, as seen by `embed_with_observer`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateEvent {
    pub epoch: u32,
    pub channel: Channel,
    pub i: usize,
    pub j: usize,
    pub dist_before: f64,
    /// Distance the unclipped update would produce. When `clipped` is
    /// set the applied displacement was smaller than this implies.
    pub dist_after: f64,
    /// The full coefficient multiplying `(y_i - y_j)`, schedule and
    /// channel weight included. Zero for the coincident-pair kick.
    pub coeff: f64,
    pub clipped: bool,
}

/// Coordinates in bit-cast atomics so the serial and race-tolerant
/// parallel paths share one update routine. Relaxed single-threaded
/// access is exact and deterministic.
struct AtomStore {
    d: usize,
    cells: Vec<AtomicU64>,
}

impl AtomStore {
    fn from_array(coords: &Array2<f64>) -> Self {
        Self {
            d: coords.ncols(),
            cells: coords.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    fn read(&self, i: usize, k: usize) -> f64 {
        f64::from_bits(self.cells[i * self.d + k].load(Ordering::Relaxed))
    }

    fn write(&self, i: usize, k: usize, v: f64) {
        self.cells[i * self.d + k].store(v.to_bits(), Ordering::Relaxed);
    }

    fn to_array(&self, n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, self.d), |(i, k)| self.read(i, k))
    }
}

/// Shared per-epoch context for the update routines.
struct Stepper<'a> {
    store: &'a AtomStore,
    cfg: &'a OptimizerConfig,
    n: usize,
    t: u32,
    lambda_a: f64,
    lambda_r: f64,
}

impl Stepper<'_> {
    /// Fill `diff` with y_i - y_j and return its length.
    fn gather(&self, i: usize, j: usize, diff: &mut [f64]) -> f64 {
        let mut sumsq = 0.0;
        for (k, slot) in diff.iter_mut().enumerate() {
            let dk = self.store.read(i, k) - self.store.read(j, k);
            *slot = dk;
            sumsq += dk * dk;
        }
        sumsq.sqrt()
    }

    /// Apply c*diff to y_i (and -c*diff to y_j when `symmetric`),
    /// clipping each coordinate. NaN contributions abort the run.
    fn apply(
        &self,
        i: usize,
        j: usize,
        c: f64,
        diff: &[f64],
        symmetric: bool,
    ) -> Result<(), EmbedError> {
        let clip = self.cfg.clip;
        for (k, &dk) in diff.iter().enumerate() {
            let delta = (c * dk).clamp(-clip, clip);
            if !delta.is_finite() {
                return Err(EmbedError::NonFinite {
                    epoch: self.t,
                    i,
                    j,
                });
            }
            self.store.write(i, k, self.store.read(i, k) + delta);
            if symmetric {
                self.store.write(j, k, self.store.read(j, k) - delta);
            }
        }
        Ok(())
    }

    fn observe(
        &self,
        observer: &mut dyn FnMut(&UpdateEvent),
        channel: Channel,
        i: usize,
        j: usize,
        zeta: f64,
        c: f64,
        diff: &[f64],
        symmetric: bool,
    ) {
        // the distance an unclipped step realizes, computed from the
        // scaled difference vector exactly as the pair dynamics do
        let gain = if symmetric { 1.0 + 2.0 * c } else { 1.0 + c };
        let mut sumsq = 0.0;
        let mut clipped = false;
        for &dk in diff {
            let s = gain * dk;
            sumsq += s * s;
            if (c * dk).abs() > self.cfg.clip {
                clipped = true;
            }
        }
        observer(&UpdateEvent {
            epoch: self.t,
            channel,
            i,
            j,
            dist_before: zeta,
            dist_after: sumsq.sqrt(),
            coeff: c,
            clipped,
        });
    }

    /// Attraction on the positive edge, then the negative draws.
    fn positive_edge(
        &self,
        i: usize,
        j: usize,
        rng: &mut ChaCha8Rng,
        diff: &mut [f64],
        observer: &mut dyn FnMut(&UpdateEvent),
        observe: bool,
    ) -> Result<(), EmbedError> {
        let zeta = self.gather(i, j, diff);
        if zeta > 0.0 {
            let c = self.lambda_a * eval_shape(&self.cfg.attraction, zeta, self.t)?;
            if observe {
                self.observe(observer, Channel::Attraction, i, j, zeta, c, diff, true);
            }
            self.apply(i, j, c, diff, true)?;
        }
        // a coincident pair has no direction to pull along; skip it

        for _ in 0..self.cfg.negatives_per_positive {
            let partner = loop {
                let cand = rng.gen_range(0..self.n);
                if cand != i {
                    break cand;
                }
            };
            self.repel(i, partner, diff, observer, observe)?;
        }
        Ok(())
    }

    fn repel(
        &self,
        i: usize,
        j: usize,
        diff: &mut [f64],
        observer: &mut dyn FnMut(&UpdateEvent),
        observe: bool,
    ) -> Result<(), EmbedError> {
        let zeta = self.gather(i, j, diff);
        if zeta == 0.0 {
            // exactly overlapping points: deterministic kick off the
            // overlap along the first coordinate
            self.store.write(i, 0, self.store.read(i, 0) + self.cfg.clip);
            if observe {
                observer(&UpdateEvent {
                    epoch: self.t,
                    channel: Channel::Repulsion,
                    i,
                    j,
                    dist_before: 0.0,
                    dist_after: self.cfg.clip,
                    coeff: 0.0,
                    clipped: false,
                });
            }
            return Ok(());
        }
        let c = self.lambda_r * eval_shape(&self.cfg.repulsion, zeta, self.t)?;
        if observe {
            self.observe(observer, Channel::Repulsion, i, j, zeta, c, diff, false);
        }
        self.apply(i, j, c, diff, false)
    }

    fn mid_pair(
        &self,
        mid: &MidNearChannel,
        i: usize,
        j: usize,
        diff: &mut [f64],
        observer: &mut dyn FnMut(&UpdateEvent),
        observe: bool,
    ) -> Result<(), EmbedError> {
        let zeta = self.gather(i, j, diff);
        if zeta == 0.0 {
            return Ok(());
        }
        let c = self.lambda_a * mid.weight * eval_shape(&mid.shape, zeta, self.t)?;
        if observe {
            self.observe(observer, Channel::MidNear, i, j, zeta, c, diff, true);
        }
        self.apply(i, j, c, diff, true)
    }
}

fn check_inputs(
    graph: &AffinityGraph,
    mid_pairs: Option<&[(usize, usize)]>,
    cfg: &OptimizerConfig,
    init: &Embedding,
) -> Result<(), EmbedError> {
    cfg.validate()?;
    if init.coords.nrows() != graph.n {
        return Err(EmbedError::Param(format!(
            "graph has {} points, init has {}",
            graph.n,
            init.coords.nrows()
        )));
    }
    if init.coords.ncols() != cfg.dim {
        return Err(EmbedError::Param(format!(
            "init is {}-dimensional, config says {}",
            init.coords.ncols(),
            cfg.dim
        )));
    }
    if init.coords.iter().any(|v| !v.is_finite()) {
        return Err(EmbedError::Param("init has non-finite coordinates".into()));
    }
    if graph.edges.is_empty() {
        return Err(EmbedError::Param("graph has no edges".into()));
    }
    match (&cfg.mid_near, mid_pairs) {
        (Some(_), None) => {
            return Err(EmbedError::Param(
                "mid-near shape configured but no pairs given".into(),
            ))
        }
        (None, Some(_)) => {
            return Err(EmbedError::Param(
                "mid-near pairs given but no mid-near channel configured".into(),
            ))
        }
        _ => {}
    }
    if let Some(pairs) = mid_pairs {
        for &(i, j) in pairs {
            if i >= graph.n || j >= graph.n || i == j {
                return Err(EmbedError::Param(format!(
                    "mid-near pair ({i}, {j}) invalid for {} points",
                    graph.n
                )));
            }
        }
    }
    Ok(())
}

/// Run the optimizer. `mid_pairs` supplies the pair set for the
/// mid-near channel and must be present exactly when
/// `cfg.mid_near` is.
pub fn embed(
    graph: &AffinityGraph,
    mid_pairs: Option<&[(usize, usize)]>,
    cfg: &OptimizerConfig,
    init: &Embedding,
) -> Result<Embedding, EmbedError> {
    embed_impl(graph, mid_pairs, cfg, init, &mut |_| {}, false)
}

/// As `embed`, but reports every update to `observer`. Only available
/// in single-threaded mode, where the event stream is deterministic.
pub fn embed_with_observer<F: FnMut(&UpdateEvent)>(
    graph: &AffinityGraph,
    mid_pairs: Option<&[(usize, usize)]>,
    cfg: &OptimizerConfig,
    init: &Embedding,
    mut observer: F,
) -> Result<Embedding, EmbedError> {
    if cfg.parallel {
        return Err(EmbedError::Param(
            "the observer needs single-threaded mode".into(),
        ));
    }
    embed_impl(graph, mid_pairs, cfg, init, &mut observer, true)
}

fn embed_impl(
    graph: &AffinityGraph,
    mid_pairs: Option<&[(usize, usize)]>,
    cfg: &OptimizerConfig,
    init: &Embedding,
    observer: &mut dyn FnMut(&UpdateEvent),
    observe: bool,
) -> Result<Embedding, EmbedError> {
    check_inputs(graph, mid_pairs, cfg, init)?;
    let max_w = graph.max_weight();
    let periods: Vec<f64> = graph.edges.iter().map(|&(_, _, p)| max_w / p).collect();
    let mut next_fire = vec![0.0f64; periods.len()];
    let store = AtomStore::from_array(&init.coords);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut diff = vec![0.0f64; cfg.dim];
    let mut firing: Vec<usize> = Vec::with_capacity(periods.len());

    let pool = if cfg.parallel {
        let threads = std::env::var("SHAPE_EMBED_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok());
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = threads {
            builder = builder.num_threads(k.max(1));
        }
        Some(
            builder
                .build()
                .map_err(|e| EmbedError::Param(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    for t in 0..cfg.epochs {
        let stepper = Stepper {
            store: &store,
            cfg,
            n: graph.n,
            t,
            lambda_a: cfg.schedule_a.value(t, cfg.epochs),
            lambda_r: cfg.schedule_r.value(t, cfg.epochs),
        };
        firing.clear();
        for (e, period) in periods.iter().enumerate() {
            if next_fire[e] <= t as f64 {
                next_fire[e] += period;
                firing.push(e);
            }
        }
        if let Some(pool) = &pool {
            pool.install(|| {
                firing.par_iter().try_for_each(|&e| {
                    let (i, j, _) = graph.edges[e];
                    let stream = ((t as u64) << 32 | e as u64)
                        .wrapping_mul(0x9e3779b97f4a7c15)
                        ^ cfg.seed;
                    let mut rng = ChaCha8Rng::seed_from_u64(stream);
                    let mut diff = vec![0.0f64; cfg.dim];
                    stepper.positive_edge(i, j, &mut rng, &mut diff, &mut |_| {}, false)
                })?;
                if let (Some(mid), Some(pairs)) = (&cfg.mid_near, mid_pairs) {
                    pairs.par_iter().try_for_each(|&(i, j)| {
                        let mut diff = vec![0.0f64; cfg.dim];
                        stepper.mid_pair(mid, i, j, &mut diff, &mut |_| {}, false)
                    })?;
                }
                Ok::<(), EmbedError>(())
            })?;
        } else {
            for &e in &firing {
                let (i, j, _) = graph.edges[e];
                stepper.positive_edge(i, j, &mut rng, &mut diff, observer, observe)?;
            }
            if let (Some(mid), Some(pairs)) = (&cfg.mid_near, mid_pairs) {
                for &(i, j) in pairs {
                    stepper.mid_pair(mid, i, j, &mut diff, observer, observe)?;
                }
            }
        }
    }
    Ok(Embedding {
        coords: store.to_array(graph.n),
        meta: EmbedMeta {
            initializer: init.meta.initializer.clone(),
            seed: Some(cfg.seed),
            config_hash: Some(config_hash(cfg)),
        },
    })
}

fn build_graph(data: &Dataset, k: usize) -> Result<AffinityGraph, EmbedError> {
    Ok(symmetrize_tconorm(&umap_affinities(&exact_knn(data, k)?, k)?)?)
}

/// One reference run from PCA init plus `r` random-init runs, with
/// their pairwise alignment matrix.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub reference: Embedding,
    pub runs: Vec<Embedding>,
    pub matrix: ProcrustesMatrix,
}

/// Repeat the embedding `r` times from random initializations seeded
/// `seed0..seed0+r-1` (each run's optimizer shares its init seed) and
/// align all runs against a PCA-initialized reference.
pub fn run_consistency(
    data: &Dataset,
    k: usize,
    cfg: &OptimizerConfig,
    r: usize,
    seed0: u64,
) -> Result<ConsistencyReport, EmbedError> {
    if r < 1 {
        return Err(EmbedError::Param("need at least 1 run".into()));
    }
    let graph = build_graph(data, k)?;
    let reference = embed(
        &graph,
        None,
        cfg,
        &init_pca(&data.x, cfg.dim, INIT_SPREAD)?,
    )?;
    let mut runs = Vec::with_capacity(r);
    for run in 0..r {
        let seed = seed0 + run as u64;
        let mut run_cfg = cfg.clone();
        run_cfg.seed = seed;
        let init = init_random(data.n_points(), cfg.dim, INIT_SPREAD, seed)?;
        runs.push(embed(&graph, None, &run_cfg, &init)?);
    }
    let clouds: Vec<Array2<f64>> = runs.iter().map(|e| e.coords.clone()).collect();
    let matrix = procrustes_matrix(&reference.coords, &clouds)?;
    Ok(ConsistencyReport {
        reference,
        runs,
        matrix,
    })
}

/// One row of a learning-rate sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub lambda_a: f64,
    pub lambda_r: f64,
    pub trustworthiness: f64,
    pub silhouette: f64,
}

/// Embed once per (λ_a, λ_r) grid cell at constant rates, sharing the
/// same random initialization and seed across cells, and score each
/// embedding. Rows come out in λ_a-major grid order.
pub fn run_sweep(
    data: &Dataset,
    k: usize,
    template: &OptimizerConfig,
    lambda_a_grid: &[f64],
    lambda_r_grid: &[f64],
) -> Result<Vec<SweepCell>, EmbedError> {
    if lambda_a_grid.is_empty() || lambda_r_grid.is_empty() {
        return Err(EmbedError::Param("sweep grids must be non-empty".into()));
    }
    let labels = data
        .labels
        .as_ref()
        .ok_or_else(|| EmbedError::Param("sweep needs labeled data".into()))?;
    let graph = build_graph(data, k)?;
    let init = init_random(data.n_points(), template.dim, INIT_SPREAD, template.seed)?;
    let mut cells = Vec::with_capacity(lambda_a_grid.len() * lambda_r_grid.len());
    for &la in lambda_a_grid {
        for &lr in lambda_r_grid {
            let mut cfg = template.clone();
            cfg.schedule_a = Schedule::constant(la);
            cfg.schedule_r = Schedule::constant(lr);
            let emb = embed(&graph, None, &cfg, &init)?;
            cells.push(SweepCell {
                lambda_a: la,
                lambda_r: lr,
                trustworthiness: trustworthiness(&data.x, &emb.coords, SWEEP_TRUST_K, None, 0)?,
                silhouette: silhouette(&emb.coords, labels)?,
            });
        }
    }
    Ok(cells)
}
