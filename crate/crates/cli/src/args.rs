use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lapssl", version, about = "Graph semi-supervised learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write results as JSON to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; computation is single-threaded and deterministic.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree statistics and the largest Laplacian eigenvalue.
    SpectralStats(SpectralStatsArgs),
    /// Apply a graph filter to node features.
    Filter(FilterArgs),
    /// Label propagation on a graph.
    Labelprop(LabelpropArgs),
    /// Gaussian CRF conditional expectation of latent node values.
    Crf(CrfArgs),
    /// Train a two-layer GCN.
    TrainGcn(TrainGcnArgs),
    /// Test accuracy of a filter family over a list of η.
    EtaSweep(EtaSweepArgs),
    /// GCN embedding, LLE weights, then label propagation.
    Net1(Net1Args),
    /// Low-rank representation of the columns of a matrix.
    Lrr(LrrArgs),
    /// Sparse subspace clustering representation.
    Ssc(SscArgs),
    /// Robust PCA: low-rank plus sparse decomposition.
    Rpca(RpcaArgs),
    /// Nuclear-norm matrix completion (missing entries as `nan`).
    Complete(CompleteArgs),
    /// Subspace clustering of the columns of a matrix.
    Cluster(ClusterArgs),
    /// Generate synthetic data.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Cora-format content file [default: $LAPSSL_DATA_DIR/cora.content].
    #[arg(long)]
    pub content: Option<PathBuf>,
    /// Cora-format cites file [default: $LAPSSL_DATA_DIR/cora.cites].
    #[arg(long)]
    pub cites: Option<PathBuf>,
    /// Scale feature rows to unit sum.
    #[arg(long)]
    pub row_normalize: bool,
    #[arg(long, default_value_t = 20)]
    pub per_class_train: usize,
    #[arg(long, default_value_t = 500)]
    pub val: usize,
    #[arg(long, default_value_t = 1000)]
    pub test: usize,
    /// Seed of the train/val/test split.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Tab-separated edge list `i<TAB>j[<TAB>w]`; without it the dataset graph is used.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Node count for --edges [default: one past the largest index].
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FilterName {
    Ar,
    Residual,
    Rnm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LaplacianName {
    Sym,
    Rw,
    Unnormalized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeName {
    Direct,
    Iterative,
}

#[derive(Debug, Args)]
pub struct FilterSpecArgs {
    #[arg(long, value_enum, default_value_t = FilterName::Ar)]
    pub filter: FilterName,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    /// Propagation power of the RNM filter.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = LaplacianName::Sym)]
    pub laplacian: LaplacianName,
    /// Self-loop weight γ of the normalized Laplacians.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ModeName::Direct)]
    pub mode: ModeName,
    /// Series length of the iterative AR filter.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerName {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DecayScopeName {
    First,
    All,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    #[arg(long, value_enum, default_value_t = DecayScopeName::First)]
    pub decay_scope: DecayScopeName,
    #[arg(long, default_value_t = 0.5)]
    pub dropout: f64,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long, value_enum, default_value_t = OptimizerName::Adam)]
    pub optimizer: OptimizerName,
}

#[derive(Debug, Args)]
pub struct SpectralStatsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Feature CSV, one row per node [default: dataset features].
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub spec: FilterSpecArgs,
    /// Write the filtered features as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LpMethod {
    Iterate,
    Closed,
    Harmonic,
}

#[derive(Debug, Args)]
pub struct LabelpropArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Seed labels, lines `node class` [default: dataset training labels].
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LpMethod::Closed)]
    pub method: LpMethod,
    #[arg(long, default_value_t = 0.99)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct CrfArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Observed values, lines `node value`.
    #[arg(long)]
    pub values: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainGcnArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub spec: FilterSpecArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Save the trained model here.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepFilter {
    Ar,
    Residual,
}

#[derive(Debug, Args)]
pub struct EtaSweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SweepFilter::Residual)]
    pub filter: SweepFilter,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.66,1,2")]
    pub etas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = LaplacianName::Sym)]
    pub laplacian: LaplacianName,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    /// Number of training seeds, starting at --seed.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightsName {
    Nonnegative,
    ClosedForm,
}

#[derive(Debug, Args)]
pub struct Net1Args {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub spec: FilterSpecArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 0.99)]
    pub lp_alpha: f64,
    #[arg(long, value_enum, default_value_t = WeightsName::Nonnegative)]
    pub weights: WeightsName,
    /// Take the argmax of the raw propagated scores.
    #[arg(long)]
    pub no_class_mass_norm: bool,
}

#[derive(Debug, Args)]
pub struct LrrArgs {
    /// CSV matrix whose columns are the samples.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct SscArgs {
    /// CSV matrix whose columns are the samples.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct RpcaArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Sparse-term weight [default: 1/√max(m, n)].
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// CSV matrix with `nan` marking missing entries.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Write the completed matrix as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClusterMethodName {
    Lrr,
    Ssc,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// CSV matrix whose columns are the samples.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ClusterMethodName::Lrr)]
    pub method: ClusterMethodName,
    /// Regularization weight [default: 10 for LRR, 0.01 for SSC].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Ground-truth labels, one per line, to report accuracy.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    Subspaces,
    Sbm,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Ambient dimension (subspaces).
    #[arg(long, default_value_t = 20)]
    pub dims: usize,
    /// Subspace dimensions (subspaces).
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    pub subspace_dims: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub points_per: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long)]
    pub orthogonal: bool,
    /// Block sizes (sbm).
    #[arg(long, value_delimiter = ',', default_value = "20,20")]
    pub blocks: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_out: f64,
    /// Write the samples (subspaces) or edge list (sbm) here.
    #[arg(long)]
    pub data_out: Option<PathBuf>,
    /// Write the labels here, one per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}
