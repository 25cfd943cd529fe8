//! Neighbor embedding driven by interchangeable force shape functions.
//!
//! The crate splits the classic attraction/repulsion pipeline into pieces
//! that can be recombined: a catalog of shape functions `f(zeta)` acting on
//! embedding distances ([`shapes`]), exact per-pair update analysis used to
//! cross-check the optimizer ([`dynamics`]), weighted kNN graph construction
//! ([`graph`]), the sampling-based optimizer itself ([`embedder`]), and
//! embedding quality metrics ([`metrics`]).
//!
//! A pair update always has the form
//!
//! ```text
//! y_i <- y_i + lambda * f(|y_i - y_j|) * (y_i - y_j)
//! ```
//!
//! so a negative `f` pulls the pair together and a positive `f` pushes
//! `y_i` away. Everything downstream (fixed points, expansion factors,
//! oscillation bounds) is a statement about `lambda * f`.

pub mod dynamics;
pub mod embedder;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod shapes;
pub mod synthetic;

pub use embedder::{
    config_hash, embed, embed_with_observer, init_pca, init_random, run_consistency, run_sweep,
    Channel, ConsistencyReport, EmbedMeta, Embedding, MidNearChannel, OptimizerConfig, Schedule,
    ScheduleKind, SweepCell, UpdateEvent, INIT_SPREAD, SWEEP_TRUST_K,
};
pub use dynamics::{
    classify_pair_update, pair_attract_step, pair_repel_step, trimap_h_a, trimap_h_r,
    trimap_zeta1_min, tsne_repulsion_expansion, PairState, PairUpdateClass, TripletState,
};
pub use error::{DynamicsError, EmbedError, GraphError, IoError, MetricsError, ShapeError};
pub use graph::{
    exact_knn, pacmap_pairs, symmetrize_tconorm, umap_affinities, AffinityGraph, Dataset,
    DirectedAffinities, KnnIndex, PacmapPairs,
};
pub use io::{
    curve_to_csv, fingerprint, graph_to_csv, labels_to_csv, matrix_to_csv, read_labels_csv,
    read_matrix_csv, read_matrix_raw, write_atomic,
};
pub use metrics::{
    knn_accuracy, procrustes_distance, procrustes_matrix, silhouette, trustworthiness,
    ProcrustesMatrix,
};
pub use synthetic::{make_gaussian_mixture, MixtureConfig};
pub use shapes::{
    check_strictly_increasing, dump_shape_curve, eval_shape, fit_ab, localmap_max_k,
    trimap_attr, trimap_rep, zeta_minus_one, CurvePoint, KernelFitConfig, Modifier, Monotonicity,
    ShapeKind, ShapeSpec, SignClass,
};
