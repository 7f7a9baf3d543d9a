//! Ablation harness: trains and evaluates the six pipeline variants that
//! toggle topology reorganization (feature or spectral scheme) and
//! prototype-based negative filtering, sharing seeds so the comparisons
//! are paired.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::contrast::trainer::{train, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalOptions};
use crate::graph::Graph;
use crate::perturb::PerturbConfig;
use crate::topo::{build_topology_view, TopoScheme};

/// One cell of the ablation grid. The `T` axis swaps the second view's
/// graph for a reorganized one (`-F` feature scheme, `-T` spectral
/// scheme); the `P` axis turns on prototype-based negative filtering.
/// Stochastic perturbation is active everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Graph,
    GraphP,
    GraphTF,
    GraphTPF,
    GraphTT,
    GraphTPT,
}

impl Variant {
    pub fn all() -> [Variant; 6] {
        [
            Variant::Graph,
            Variant::GraphP,
            Variant::GraphTF,
            Variant::GraphTPF,
            Variant::GraphTT,
            Variant::GraphTPT,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Variant::Graph => "Graph",
            Variant::GraphP => "GraphP",
            Variant::GraphTF => "GraphT-F",
            Variant::GraphTPF => "GraphTP-F",
            Variant::GraphTT => "GraphT-T",
            Variant::GraphTPT => "GraphTP-T",
        }
    }

    pub fn from_label(label: &str) -> Result<Variant> {
        Variant::all()
            .into_iter()
            .find(|v| v.label() == label)
            .ok_or_else(|| Error::invalid(format!("unknown ablation variant '{label}'")))
    }

    /// Topology scheme for the second view, or `None` to reuse the
    /// original graph.
    pub fn scheme(&self, cfg: &AblationConfig) -> Option<TopoScheme> {
        match self {
            Variant::Graph | Variant::GraphP => None,
            Variant::GraphTF | Variant::GraphTPF => Some(TopoScheme::FeatureKnn {
                k: cfg.feature_k,
            }),
            Variant::GraphTT | Variant::GraphTPT => Some(TopoScheme::SpectralPower {
                k: cfg.spectral_k,
                alpha: cfg.spectral_alpha,
            }),
        }
    }

    pub fn filtering(&self) -> bool {
        matches!(
            self,
            Variant::GraphP | Variant::GraphTPF | Variant::GraphTPT
        )
    }
}

/// Shared settings for every variant; per-run seeds override the seeds
/// embedded in `train` and `eval`.
#[derive(Clone, Debug)]
pub struct AblationConfig {
    pub train: TrainConfig,
    pub perturb_original: PerturbConfig,
    pub perturb_reorganized: PerturbConfig,
    pub feature_k: usize,
    pub spectral_k: usize,
    pub spectral_alpha: f64,
    pub eval: EvalOptions,
}

impl AblationConfig {
    pub fn new(train: TrainConfig) -> AblationConfig {
        AblationConfig {
            train,
            perturb_original: PerturbConfig::default(),
            perturb_reorganized: PerturbConfig::default(),
            feature_k: 1,
            spectral_k: 1,
            spectral_alpha: 80.0,
            eval: EvalOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.perturb_original.validate()?;
        self.perturb_reorganized.validate()?;
        if self.train.warmup >= self.train.epochs {
            return Err(Error::invalid(
                "ablation needs warmup < epochs so filtering variants actually filter",
            ));
        }
        TopoScheme::FeatureKnn { k: self.feature_k }.validate()?;
        TopoScheme::SpectralPower {
            k: self.spectral_k,
            alpha: self.spectral_alpha,
        }
        .validate()
    }
}

/// One (variant, seed) training + evaluation outcome.
#[derive(Clone, Debug, Serialize)]
pub struct VariantRun {
    pub variant: String,
    pub seed: u64,
    pub accuracy: f64,
    pub accuracy_std: f64,
    pub nmi: f64,
    pub homogeneity: f64,
    pub sim_at: BTreeMap<usize, f64>,
    pub final_loss: f64,
    /// Mean filtered fraction across epochs; exactly 0 when filtering is
    /// off.
    pub mean_filtered_fraction: f64,
    /// Epochs on which a prototype model was fit.
    pub filtered_epochs: usize,
}

/// Seed-aggregated view of one variant.
#[derive(Clone, Debug, Serialize)]
pub struct VariantSummary {
    pub variant: String,
    pub accuracy_mean: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub accuracy_std: f64,
    pub nmi_mean: f64,
    pub homogeneity_mean: f64,
    pub runs: Vec<VariantRun>,
}

/// Builds the second-view graph for a variant: the original graph when the
/// topology axis is off, otherwise the reorganized view.
pub fn topology_for(g: &Graph, variant: Variant, cfg: &AblationConfig) -> Result<Graph> {
    match variant.scheme(cfg) {
        None => Ok(g.clone()),
        Some(scheme) => build_topology_view(g, &scheme),
    }
}

/// Trains one variant with one seed and evaluates the frozen embeddings.
/// `g_t` must be the graph from [`topology_for`] so callers can reuse it
/// across seeds.
pub fn run_variant(
    g: &Graph,
    g_t: &Graph,
    variant: Variant,
    cfg: &AblationConfig,
    seed: u64,
) -> Result<VariantRun> {
    let labels = g
        .labels()
        .ok_or_else(|| Error::invalid("ablation needs node labels"))?
        .to_vec();
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = seed;
    if !variant.filtering() {
        // warmup == epochs keeps the prototype machinery off for good.
        train_cfg.warmup = train_cfg.epochs;
    }
    let out = train(
        g,
        g_t,
        &train_cfg,
        &cfg.perturb_original,
        &cfg.perturb_reorganized,
    )?;

    let mut eval_opts = cfg.eval.clone();
    eval_opts.probe.seed = seed;
    eval_opts.clustering.seed = seed;
    let report = evaluate(&out.embeddings, &labels, &eval_opts)?;

    let filtered_epochs = out
        .log
        .iter()
        .filter(|r| r.kmeans_inertia.is_some())
        .count();
    let mean_filtered_fraction = if out.log.is_empty() {
        0.0
    } else {
        out.log.iter().map(|r| r.filtered_fraction).sum::<f64>() / out.log.len() as f64
    };
    Ok(VariantRun {
        variant: variant.label().to_string(),
        seed,
        accuracy: report.accuracy_mean,
        accuracy_std: report.accuracy_std,
        nmi: report.nmi,
        homogeneity: report.homogeneity,
        sim_at: report.sim_at,
        final_loss: out.log.last().map_or(f64::NAN, |r| r.loss),
        mean_filtered_fraction,
        filtered_epochs,
    })
}

/// Runs every variant over the same seed list and aggregates. Topology
/// views are computed once per scheme, not once per seed.
pub fn run_ablation(g: &Graph, cfg: &AblationConfig, seeds: &[u64]) -> Result<Vec<VariantSummary>> {
    if seeds.is_empty() {
        return Err(Error::invalid("ablation needs at least one seed"));
    }
    cfg.validate()?;
    cfg.train.validate(g.num_nodes())?;

    let mut summaries = Vec::with_capacity(6);
    let mut cached: Vec<(Option<TopoScheme>, Graph)> = Vec::new();
    for variant in Variant::all() {
        let scheme = variant.scheme(cfg);
        let g_t = match cached.iter().find(|(s, _)| *s == scheme) {
            Some((_, g_t)) => g_t.clone(),
            None => {
                let g_t = topology_for(g, variant, cfg)?;
                cached.push((scheme, g_t.clone()));
                g_t
            }
        };
        let runs: Vec<VariantRun> = seeds
            .iter()
            .map(|&seed| run_variant(g, &g_t, variant, cfg, seed))
            .collect::<Result<_>>()?;

        let acc_mean = runs.iter().map(|r| r.accuracy).sum::<f64>() / runs.len() as f64;
        let acc_std = if runs.len() > 1 {
            (runs
                .iter()
                .map(|r| (r.accuracy - acc_mean) * (r.accuracy - acc_mean))
                .sum::<f64>()
                / (runs.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        summaries.push(VariantSummary {
            variant: variant.label().to_string(),
            accuracy_mean: acc_mean,
            accuracy_std: acc_std,
            nmi_mean: runs.iter().map(|r| r.nmi).sum::<f64>() / runs.len() as f64,
            homogeneity_mean: runs.iter().map(|r| r.homogeneity).sum::<f64>()
                / runs.len() as f64,
            runs,
        });
    }
    Ok(summaries)
}

/// Renders the aggregate table as GitHub-flavored markdown.
pub fn markdown_table(summaries: &[VariantSummary]) -> String {
    let mut out = String::from("| Variant | Accuracy | NMI | Homogeneity |\n|---|---|---|---|\n");
    for s in summaries {
        out.push_str(&format!(
            "| {} | {:.4} ± {:.4} | {:.4} | {:.4} |\n",
            s.variant, s.accuracy_mean, s.accuracy_std, s.nmi_mean, s.homogeneity_mean
        ));
    }
    out
}
