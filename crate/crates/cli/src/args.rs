//! Command-line surface. Every subcommand takes a mandatory `--seed` (runs
//! are never seeded from the clock) and an `--out` artifact directory;
//! most accept a `--config` file whose keys individual flags override.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "topogcl",
    version,
    about = "Unsupervised node embeddings from topology-reorganized contrastive views"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build and cache the reorganized topology view; report edge statistics.
    Augment(AugmentArgs),
    /// Train the encoder; write checkpoint, embeddings, and an epoch log.
    Train(TrainArgs),
    /// Score stored embeddings: linear probe, clustering agreement, sim@n.
    Eval(EvalArgs),
    /// Run the six-variant ablation grid with shared seeds.
    Ablate(AblateArgs),
    /// Generate a stochastic block model benchmark graph.
    SbmGen(SbmGenArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Config file: line-based `key = value` under `[section]` headers.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; mandatory so no run is silently clock-seeded.
    #[arg(long)]
    pub seed: u64,
    /// Artifact directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GraphFlags {
    /// Edge list: one `u v` pair per line (`graph.edges`).
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Feature matrix: `.csv` text or TGM binary (`graph.features`).
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Node labels, one integer per line (`graph.labels`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SchemeFlags {
    /// Topology scheme: `feature`, `spectral`, or `none` (`augment.scheme`).
    #[arg(long)]
    pub scheme: Option<String>,
    /// Edges kept per node in the reorganized view (`augment.k`).
    #[arg(long)]
    pub k: Option<usize>,
    /// Eigenvalue power for the spectral scheme (`augment.alpha`).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub graph: GraphFlags,
    #[command(flatten)]
    pub scheme: SchemeFlags,
    /// Topology cache directory (`augment.cache_dir`, default `<out>/cache`).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub graph: GraphFlags,
    #[command(flatten)]
    pub scheme: SchemeFlags,
    /// Topology cache directory (`augment.cache_dir`, default `<out>/cache`).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Embedding width d′ (`train.embed_dim`).
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Hidden width (`train.hidden_dim`, default 2·d′).
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    /// Softmax temperature τ (`train.tau`).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Training epochs E (`train.epochs`).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Warm-up epochs T′ before negative filtering starts (`train.warmup`).
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Prototype count K (`train.prototypes`).
    #[arg(long)]
    pub prototypes: Option<usize>,
    /// Adam learning rate (`train.lr`).
    #[arg(long)]
    pub lr: Option<f64>,
    /// Concentration regularizer ε (`train.epsilon`).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Negative pool: `inter-and-intra` or `inter-only` (`train.pool`).
    #[arg(long)]
    pub pool: Option<String>,
    /// Feature mask base rate (`perturb.p_f`).
    #[arg(long)]
    pub p_f: Option<f64>,
    /// Edge removal base rate (`perturb.p_e`).
    #[arg(long)]
    pub p_e: Option<f64>,
    /// Perturbation probability cap (`perturb.p_tau`).
    #[arg(long)]
    pub p_tau: Option<f64>,
    /// Train the plain objective throughout (sets T′ = E).
    #[arg(long)]
    pub warmup_only: bool,
    /// Checkpoint cadence in epochs (`train.checkpoint_every`).
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Resume from this checkpoint directory.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Embedding matrix (TGM) to score.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Node labels, one integer per line.
    #[arg(long)]
    pub labels: PathBuf,
    /// Probe repetitions (`eval.probe_reps`).
    #[arg(long)]
    pub probe_reps: Option<usize>,
    /// Comma-separated sim@n sizes (`eval.sim_ns`).
    #[arg(long)]
    pub sim_ns: Option<String>,
    /// k-means cluster count (`eval.clusters`, default = label classes).
    #[arg(long)]
    pub clusters: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Seeds used: `--seed`, `--seed`+1, … (`ablate.num_seeds`).
    #[arg(long)]
    pub num_seeds: Option<usize>,
    /// Embedding width for every variant (`train.embed_dim`).
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Epochs for every variant (`train.epochs`).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Warm-up epochs for filtering variants (`train.warmup`).
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Prototype count K (`train.prototypes`).
    #[arg(long)]
    pub prototypes: Option<usize>,
    /// k for the feature-scheme variants (`ablate.feature_k`).
    #[arg(long)]
    pub feature_k: Option<usize>,
    /// k for the spectral-scheme variants (`ablate.spectral_k`).
    #[arg(long)]
    pub spectral_k: Option<usize>,
    /// α for the spectral-scheme variants (`ablate.spectral_alpha`).
    #[arg(long)]
    pub spectral_alpha: Option<f64>,
    /// Probe repetitions (`eval.probe_reps`).
    #[arg(long)]
    pub probe_reps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SbmGenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Node count (`sbm.nodes`).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Block count (`sbm.blocks`).
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Intra-block edge probability (`sbm.p_in`).
    #[arg(long)]
    pub p_in: Option<f64>,
    /// Inter-block edge probability (`sbm.p_out`).
    #[arg(long)]
    pub p_out: Option<f64>,
    /// Feature dimensionality (`sbm.feature_dim`).
    #[arg(long)]
    pub feature_dim: Option<usize>,
    /// Feature noise standard deviation (`sbm.noise`).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Write features as CSV text instead of TGM binary.
    #[arg(long)]
    pub csv_features: bool,
}
