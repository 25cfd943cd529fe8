//! Batch front door for the embedding engine.
//!
//! Every command reads plain files (CSV, or raw little-endian f64 with
//! a JSON sidecar), writes plain files, and signals success or failure
//! through its exit code alone: 0 success, 2 bad configuration, 3 bad
//! data, 4 numeric failure. Output lands on stdout when no `--out` is
//! given; file outputs get a manifest written next to them.

mod oracle;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use shape_embed::{
    config_hash, curve_to_csv, dump_shape_curve, embed, exact_knn, fingerprint, fit_ab,
    init_pca, init_random, labels_to_csv, make_gaussian_mixture, matrix_to_csv, pacmap_pairs,
    read_labels_csv, read_matrix_csv, read_matrix_raw, run_consistency, run_sweep,
    symmetrize_tconorm, umap_affinities, write_atomic, AffinityGraph, Dataset, EmbedError,
    Embedding, GraphError, IoError, KernelFitConfig, MetricsError, MixtureConfig,
    OptimizerConfig, ShapeError, ShapeSpec,
};

#[derive(Parser)]
#[command(name = "shape-embed", version, about = "Pair-force neighbor embedding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Embed a dataset and write the low-dimensional coordinates
    Embed(EmbedArgs),
    /// Score a grid of constant rate pairs on one labeled dataset
    Sweep(SweepArgs),
    /// Align repeated runs against a shared reference embedding
    Consistency(ConsistencyArgs),
    /// Tabulate a force shape over a distance range
    Shapes(ShapesArgs),
    /// Run the numeric cross-check suite and report every row
    Oracle(OracleArgs),
    /// Fit kernel parameters (a, b) for a min-dist / spread pair
    FitAb(FitAbArgs),
    /// Generate a seeded Gaussian mixture benchmark dataset
    MakeSynthetic(MakeSyntheticArgs),
}

#[derive(Args)]
struct EmbedArgs {
    /// Input matrix: *.csv, or raw little-endian f64 with a sidecar at <path>.json
    #[arg(long)]
    data: PathBuf,
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; omit to print coordinates to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the optimizer seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the epoch count
    #[arg(long)]
    epochs: Option<u32>,
    /// Override the attraction schedule's starting rate
    #[arg(long)]
    lambda_a: Option<f64>,
    /// Override the repulsion schedule's starting rate
    #[arg(long)]
    lambda_r: Option<f64>,
    /// Process edges in parallel; worker count honors SHAPE_EMBED_THREADS
    #[arg(long)]
    parallel: bool,
    /// Write a column header row
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    /// Class labels, one integer per data row
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; omit to print the table to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Attraction rates, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    lambda_a: Vec<f64>,
    /// Repulsion rates, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    lambda_r: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct ConsistencyArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reference, runs, matrix, and manifest
    #[arg(long)]
    out: PathBuf,
    /// Number of repeated runs
    #[arg(long)]
    runs: usize,
    /// Base seed for the repeated runs (run i uses seed + i);
    /// defaults to the optimizer seed + 1
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct ShapesArgs {
    /// Shape description (JSON), e.g. '{"kind":{"umap_attr":{"a":1.0,"b":1.0}}}'
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 0.0)]
    zmin: f64,
    #[arg(long, default_value_t = 10.0)]
    zmax: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Epoch at which gated modifiers are evaluated
    #[arg(long, default_value_t = 0)]
    epoch: u32,
    /// Output CSV; omit to print the curve to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Report CSV; omit to print to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitAbArgs {
    /// Distance below which the target kernel saturates at 1
    min_dist: f64,
    /// Length scale of the target kernel's exponential tail
    spread: f64,
}

#[derive(Args)]
struct MakeSyntheticArgs {
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 50)]
    dims: usize,
    /// Per-coordinate standard deviation within a cluster
    #[arg(long, default_value_t = 1.0)]
    cluster_std: f64,
    /// Per-coordinate standard deviation of the cluster centers
    #[arg(long, default_value_t = 2.5)]
    center_std: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Data CSV; omit to print it to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Labels CSV (requires --out)
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Write a column header row on the data CSV
    #[arg(long)]
    header: bool,
}

/// A failed command, bucketed by exit code.
enum Failure {
    /// Exit 2: the request itself is wrong (config, flags, spec).
    Config(String),
    /// Exit 3: an input could not be read or does not support the request.
    Data(String),
    /// Exit 4: the computation ran and broke down numerically.
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ShapeError> for Failure {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::NoRoot { .. } | ShapeError::Convergence(_) => {
                Failure::Numeric(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Param(_) => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<EmbedError> for Failure {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::NonFinite { .. } => Failure::Numeric(e.to_string()),
            EmbedError::Rank(_) => Failure::Data(e.to_string()),
            EmbedError::Metrics(m) => m.into(),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Embed(a) => cmd_embed(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Consistency(a) => cmd_consistency(a),
        Cmd::Shapes(a) => cmd_shapes(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::FitAb(a) => cmd_fit_ab(a),
        Cmd::MakeSynthetic(a) => cmd_make_synthetic(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

// ---------------------------------------------------------------------------
// configuration file

/// On-disk run configuration: graph construction, optimizer, initializer.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    graph: GraphSection,
    optimizer: OptimizerConfig,
    #[serde(default)]
    init: InitSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GraphSection {
    k: usize,
    /// Mid-near pairs drawn per point when the optimizer declares a
    /// mid-near channel; ignored otherwise.
    mid_pairs_per_point: usize,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            k: 15,
            mid_pairs_per_point: 5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct InitSection {
    kind: InitKind,
    scale: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InitKind {
    Pca,
    Random,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            kind: InitKind::Pca,
            scale: 10.0,
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn apply_overrides(
    opt: &mut OptimizerConfig,
    seed: Option<u64>,
    epochs: Option<u32>,
    parallel: bool,
) {
    if let Some(s) = seed {
        opt.seed = s;
    }
    if let Some(e) = epochs {
        opt.epochs = e;
    }
    if parallel {
        opt.parallel = true;
    }
}

// ---------------------------------------------------------------------------
// data files

fn load_matrix(path: &Path) -> Result<Array2<f64>, Failure> {
    let m = if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        read_matrix_csv(path)?
    } else {
        let sidecar = PathBuf::from(format!("{}.json", path.display()));
        read_matrix_raw(path, &sidecar)?
    };
    Ok(m)
}

fn load_dataset(path: &Path, labels: Option<&Path>) -> Result<Dataset, Failure> {
    let x = load_matrix(path)?;
    let labels = match labels {
        Some(p) => Some(read_labels_csv(p)?),
        None => None,
    };
    // validation failures here blame the file contents, not the request
    Dataset::new(x, labels).map_err(|e| Failure::Data(e.to_string()))
}

fn build_graph(data: &Dataset, k: usize) -> Result<AffinityGraph, Failure> {
    Ok(symmetrize_tconorm(&umap_affinities(&exact_knn(data, k)?, k)?)?)
}

// ---------------------------------------------------------------------------
// manifests

/// Provenance record written next to every file output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_hash: Option<String>,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_time_ms: u128,
    version: String,
}

impl RunManifest {
    fn new(command: &str, started: Instant) -> Self {
        Self {
            command: command.to_string(),
            config_hash: None,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_time_ms: started.elapsed().as_millis(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn path_for(out: &Path) -> PathBuf {
        PathBuf::from(format!("{}.manifest.json", out.display()))
    }

    fn write(mut self, path: &Path, started: Instant) -> Result<(), Failure> {
        self.wall_time_ms = started.elapsed().as_millis();
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
        Ok(())
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Write `body` to `out` plus a manifest, or print it when no path was
/// given (stdout mode produces no files at all).
fn emit(
    out: Option<&Path>,
    body: &str,
    mut manifest: RunManifest,
    started: Instant,
) -> Result<(), Failure> {
    match out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            manifest.outputs.push(display(path));
            manifest.write(&RunManifest::path_for(path), started)
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// commands

fn cmd_embed(a: EmbedArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let cfg = load_config(&a.config)?;
    let mut opt = cfg.optimizer;
    apply_overrides(&mut opt, a.seed, a.epochs, a.parallel);
    if let Some(l) = a.lambda_a {
        opt.schedule_a.lambda0 = l;
    }
    if let Some(l) = a.lambda_r {
        opt.schedule_r.lambda0 = l;
    }

    let data = load_dataset(&a.data, None)?;
    let graph = build_graph(&data, cfg.graph.k)?;
    let mid_pairs = match &opt.mid_near {
        Some(_) => Some(
            pacmap_pairs(&data, 10, cfg.graph.mid_pairs_per_point, 0, opt.seed)?.mid_near,
        ),
        None => None,
    };
    let init = make_init(&data, &opt, &cfg.init)?;
    let emb = embed(&graph, mid_pairs.as_deref(), &opt, &init)?;

    let header = a
        .header
        .then(|| (0..opt.dim).map(|j| format!("y{j}")).collect::<Vec<_>>());
    let body = matrix_to_csv(&emb.coords, header.as_deref());

    let mut manifest = RunManifest::new("embed", started);
    manifest.config_hash = Some(config_hash(&opt));
    manifest.seeds.push(opt.seed);
    manifest.inputs = vec![display(&a.data), display(&a.config)];
    emit(a.out.as_deref(), &body, manifest, started)
}

fn make_init(
    data: &Dataset,
    opt: &OptimizerConfig,
    init: &InitSection,
) -> Result<Embedding, Failure> {
    let emb = match init.kind {
        InitKind::Pca => init_pca(&data.x, opt.dim, init.scale)?,
        InitKind::Random => init_random(data.n_points(), opt.dim, init.scale, opt.seed)?,
    };
    Ok(emb)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let cfg = load_config(&a.config)?;
    let mut opt = cfg.optimizer;
    apply_overrides(&mut opt, a.seed, a.epochs, a.parallel);

    let data = load_dataset(&a.data, Some(&a.labels))?;
    let cells = run_sweep(&data, cfg.graph.k, &opt, &a.lambda_a, &a.lambda_r)?;

    let mut body = String::from("lambda_a,lambda_r,trustworthiness,silhouette\n");
    for c in &cells {
        writeln!(
            body,
            "{},{},{},{}",
            c.lambda_a, c.lambda_r, c.trustworthiness, c.silhouette
        )
        .expect("string write");
    }

    let mut manifest = RunManifest::new("sweep", started);
    manifest.config_hash = Some(config_hash(&opt));
    manifest.seeds.push(opt.seed);
    manifest.inputs = vec![display(&a.data), display(&a.labels), display(&a.config)];
    emit(a.out.as_deref(), &body, manifest, started)
}

fn cmd_consistency(a: ConsistencyArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let cfg = load_config(&a.config)?;
    let mut opt = cfg.optimizer;
    apply_overrides(&mut opt, None, a.epochs, a.parallel);
    let seed0 = a.seed.unwrap_or(opt.seed + 1);

    let data = load_dataset(&a.data, None)?;
    let report = run_consistency(&data, cfg.graph.k, &opt, a.runs, seed0)?;

    fs::create_dir_all(&a.out).map_err(IoError::from)?;
    let mut outputs = Vec::new();
    let mut save = |name: String, body: &str| -> Result<(), Failure> {
        let path = a.out.join(&name);
        write_atomic(&path, body.as_bytes())?;
        outputs.push(display(&path));
        Ok(())
    };
    save(
        "reference.csv".into(),
        &matrix_to_csv(&report.reference.coords, None),
    )?;
    for (i, run) in report.runs.iter().enumerate() {
        save(format!("run_{i:02}.csv"), &matrix_to_csv(&run.coords, None))?;
    }
    let mut matrix = matrix_to_csv(&report.matrix.m, None);
    writeln!(matrix, "# {},{}", report.matrix.mean, report.matrix.std).expect("string write");
    save("matrix.csv".into(), &matrix)?;

    let mut manifest = RunManifest::new("consistency", started);
    manifest.config_hash = Some(config_hash(&opt));
    manifest.seeds.push(opt.seed);
    manifest.seeds.extend((0..a.runs as u64).map(|i| seed0 + i));
    manifest.inputs = vec![display(&a.data), display(&a.config)];
    manifest.outputs = outputs;
    manifest.write(&a.out.join("manifest.json"), started)
}

fn cmd_shapes(a: ShapesArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let spec: ShapeSpec = serde_json::from_str(&a.spec)
        .map_err(|e| Failure::Config(format!("--spec: {e}")))?;
    let curve = dump_shape_curve(&spec, a.zmin, a.zmax, a.points, a.epoch)?;
    let body = curve_to_csv(&curve);

    let mut manifest = RunManifest::new("shapes", started);
    let canonical = serde_json::to_string(&spec).expect("spec serializes");
    manifest.config_hash = Some(fingerprint(canonical.as_bytes()));
    emit(a.out.as_deref(), &body, manifest, started)
}

fn cmd_oracle(a: OracleArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let rows = oracle::run_all();
    let mut body = String::from("check,status,detail\n");
    for r in &rows {
        writeln!(body, "{},{},{}", r.check, r.status.as_str(), r.detail).expect("string write");
    }

    let manifest = RunManifest::new("oracle", started);
    emit(a.out.as_deref(), &body, manifest, started)?;

    let failed = rows
        .iter()
        .filter(|r| r.status == oracle::Status::Fail)
        .count();
    if failed > 0 {
        return Err(Failure::Numeric(format!("{failed} cross-checks failed")));
    }
    Ok(())
}

fn cmd_fit_ab(a: FitAbArgs) -> Result<(), Failure> {
    let cfg = KernelFitConfig {
        min_dist: a.min_dist,
        spread: a.spread,
        ..KernelFitConfig::default()
    };
    let (ka, kb) = fit_ab(&cfg)?;
    println!("a,b");
    println!("{ka},{kb}");
    Ok(())
}

fn cmd_make_synthetic(a: MakeSyntheticArgs) -> Result<(), Failure> {
    let started = Instant::now();
    if a.labels_out.is_some() && a.out.is_none() {
        return Err(Failure::Config("--labels-out requires --out".into()));
    }
    let cfg = MixtureConfig {
        n_clusters: a.clusters,
        n_total: a.points,
        n_dims: a.dims,
        cluster_std: a.cluster_std,
        center_std: a.center_std,
        seed: a.seed,
    };
    let data = make_gaussian_mixture(&cfg)?;

    let header = a
        .header
        .then(|| (0..a.dims).map(|j| format!("x{j}")).collect::<Vec<_>>());
    let body = matrix_to_csv(&data.x, header.as_deref());

    match &a.out {
        Some(out) => {
            write_atomic(out, body.as_bytes())?;
            let mut outputs = vec![display(out)];
            if let Some(lp) = &a.labels_out {
                let labels = data.labels.as_ref().expect("mixture is labeled");
                write_atomic(lp, labels_to_csv(labels).as_bytes())?;
                outputs.push(display(lp));
            }
            let mut manifest = RunManifest::new("make-synthetic", started);
            manifest.config_hash = Some(fingerprint(
                format!(
                    "{},{},{},{},{},{}",
                    cfg.n_clusters,
                    cfg.n_total,
                    cfg.n_dims,
                    cfg.cluster_std,
                    cfg.center_std,
                    cfg.seed
                )
                .as_bytes(),
            ));
            manifest.seeds.push(cfg.seed);
            manifest.outputs = outputs;
            manifest.write(&RunManifest::path_for(out), started)
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
