//! The training loop: perturb both topologies, encode, contrast, and step.
//!
//! Every random decision is drawn from a substream keyed by `(seed, role,
//! epoch)`, so the trajectory is reproducible bit for bit and training can
//! resume from a checkpoint mid-run without serializing generator state:
//! epoch `e` consumes exactly the streams tagged with `e`, whether or not
//! earlier epochs ran in the same process.
//!
//! The first `warmup` epochs contrast against the full negative pool.
//! After that, each epoch fits prototypes to the stacked view embeddings
//! (k-means with concentration estimates) and samples a filter that
//! discards probable false negatives. `warmup == epochs` disables
//! filtering entirely; the log shows which regime an epoch ran in through
//! the `kmeans_inertia` field.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contrast::filter::build_negative_filter;
use crate::contrast::loss::info_nce;
use crate::contrast::prototype::{concentration, kmeans};
use crate::contrast::NegativePool;
use crate::encoder::{backward, forward, normalize_adjacency, Activation, EncoderParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::rng::stream;
use crate::numerics::{AdamState, DenseMatrix, Rng};
use crate::perturb::{adaptive_weights, perturb, PerturbConfig};

/// Hyperparameters for one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Output embedding dimension.
    pub embed_dim: usize,
    /// Hidden layer width; `None` means `2 · embed_dim`.
    pub hidden_dim: Option<usize>,
    /// First-layer nonlinearity (identity exists for tests).
    #[serde(with = "activation_name")]
    pub activation: Activation,
    /// Softmax temperature.
    pub tau: f64,
    /// Total epochs.
    pub epochs: usize,
    /// Epochs trained against the unfiltered pool before filtering starts;
    /// `warmup == epochs` never filters.
    pub warmup: usize,
    /// Number of prototype clusters.
    pub prototypes: usize,
    /// Lloyd iteration budget per epoch.
    pub kmeans_iters: usize,
    /// Size discount in the concentration denominator.
    pub epsilon: f64,
    /// Adam learning rate.
    pub lr: f64,
    /// Negative pool composition.
    pub pool: NegativePool,
    /// Master seed; all randomness derives from it.
    pub seed: u64,
}

mod activation_name {
    use super::Activation;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &Activation, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(a.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Activation, D::Error> {
        let name = String::deserialize(d)?;
        Activation::from_name(&name).map_err(serde::de::Error::custom)
    }
}

impl TrainConfig {
    /// Defaults used throughout: τ = 0.4, 1000 epochs with 200 warm-up,
    /// 100 prototypes, ε = 10, Adam at 1e-3.
    pub fn new(embed_dim: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            embed_dim,
            hidden_dim: None,
            activation: Activation::Relu,
            tau: 0.4,
            epochs: 1000,
            warmup: 200,
            prototypes: 100,
            kmeans_iters: 50,
            epsilon: 10.0,
            lr: 1e-3,
            pool: NegativePool::InterAndIntra,
            seed,
        }
    }

    pub fn hidden(&self) -> usize {
        self.hidden_dim.unwrap_or(2 * self.embed_dim)
    }

    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if self.embed_dim == 0 || self.hidden() == 0 {
            return Err(Error::invalid("encoder dimensions must be nonzero"));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {}",
                self.tau
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epoch count must be at least 1"));
        }
        if self.warmup == 0 || self.warmup > self.epochs {
            return Err(Error::invalid(format!(
                "warm-up must lie in [1, epochs]; got {} of {}",
                self.warmup, self.epochs
            )));
        }
        if self.warmup < self.epochs {
            if self.prototypes == 0 {
                return Err(Error::invalid("prototype count must be at least 1"));
            }
            if 2 * num_nodes < self.prototypes {
                return Err(Error::invalid(format!(
                    "{} prototypes cannot be fitted to {} stacked embeddings",
                    self.prototypes,
                    2 * num_nodes
                )));
            }
            if self.kmeans_iters == 0 {
                return Err(Error::invalid("k-means iteration budget must be positive"));
            }
            if !self.epsilon.is_finite() || self.epsilon <= 1.0 {
                return Err(Error::invalid("epsilon must exceed 1"));
            }
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    /// Fraction of the candidate negative pool dropped by the filter;
    /// 0 during warm-up.
    pub filtered_fraction: f64,
    /// Final k-means inertia, `None` during warm-up: warm-up epochs never
    /// construct a prototype model.
    pub kmeans_inertia: Option<f64>,
    pub wall_ms: f64,
}

/// Mutable state carried across a resume boundary.
#[derive(Clone, Debug)]
pub struct TrainState {
    pub params: EncoderParams,
    pub adam: AdamState,
    /// First epoch the resumed run should execute.
    pub next_epoch: usize,
}

/// Everything a finished run produces.
#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub params: EncoderParams,
    pub adam: AdamState,
    /// Final-pass embeddings of the *clean* original graph.
    pub embeddings: DenseMatrix,
    pub log: Vec<EpochRecord>,
}

/// Trains on the original graph `g` and its reorganized topology `g_t`
/// (pass `g` twice to train without topology reorganization).
pub fn train(
    g: &Graph,
    g_t: &Graph,
    cfg: &TrainConfig,
    perturb_original: &PerturbConfig,
    perturb_reorganized: &PerturbConfig,
) -> Result<TrainOutput> {
    train_from(
        g,
        g_t,
        cfg,
        perturb_original,
        perturb_reorganized,
        None,
        |_, _, _| Ok(()),
    )
}

/// [`train`] with an explicit starting state and a per-epoch callback
/// (checkpointing, log streaming). The callback sees each epoch's record
/// and the post-step parameters; resuming from the state it observed at
/// epoch `e` reproduces the original run's remaining epochs bit for bit.
pub fn train_from(
    g: &Graph,
    g_t: &Graph,
    cfg: &TrainConfig,
    perturb_original: &PerturbConfig,
    perturb_reorganized: &PerturbConfig,
    state: Option<TrainState>,
    mut on_epoch: impl FnMut(&EpochRecord, &EncoderParams, &AdamState) -> Result<()>,
) -> Result<TrainOutput> {
    cfg.validate(g.num_nodes())?;
    if g.num_nodes() != g_t.num_nodes() {
        return Err(Error::invalid(format!(
            "views disagree on node count: {} vs {}",
            g.num_nodes(),
            g_t.num_nodes()
        )));
    }
    if g.feature_dim() != g_t.feature_dim() {
        return Err(Error::invalid("views disagree on feature dimension"));
    }
    if g.num_nodes() == 0 {
        return Err(Error::invalid("cannot train on an empty graph"));
    }

    let weights_original = adaptive_weights(g, perturb_original)?;
    let weights_reorganized = adaptive_weights(g_t, perturb_reorganized)?;

    let (mut params, mut adam, start) = match state {
        Some(s) => {
            let (d_in, hidden, d_out) = s.params.dims();
            if d_in != g.feature_dim() || hidden != cfg.hidden() || d_out != cfg.embed_dim {
                return Err(Error::invalid(
                    "checkpoint dimensions do not match the configuration",
                ));
            }
            if s.next_epoch > cfg.epochs {
                return Err(Error::invalid(format!(
                    "checkpoint is at epoch {} but the run ends at {}",
                    s.next_epoch, cfg.epochs
                )));
            }
            (s.params, s.adam, s.next_epoch)
        }
        None => {
            let mut init_rng = Rng::substream(cfg.seed, stream::INIT, 0);
            let params = EncoderParams::init(
                g.feature_dim(),
                cfg.hidden(),
                cfg.embed_dim,
                cfg.activation,
                &mut init_rng,
            )?;
            let adam = AdamState::new(&[&params.w1, &params.w2]);
            (params, adam, 0)
        }
    };

    let mut log = Vec::with_capacity(cfg.epochs.saturating_sub(start));
    for epoch in start..cfg.epochs {
        let t0 = Instant::now();

        let mut rng_v1 = Rng::substream(cfg.seed, stream::VIEW_ORIGINAL, epoch as u64);
        let mut rng_v2 = Rng::substream(cfg.seed, stream::VIEW_REORGANIZED, epoch as u64);
        let v1 = perturb(g, &weights_original, &mut rng_v1)?;
        let v2 = perturb(g_t, &weights_reorganized, &mut rng_v2)?;
        let adj1 = normalize_adjacency(&v1);
        let adj2 = normalize_adjacency(&v2);
        let (z1, cache1) = forward(&params, &adj1, v1.features())?;
        let (z2, cache2) = forward(&params, &adj2, v2.features())?;

        let (filter, inertia) = if epoch < cfg.warmup {
            (None, None)
        } else {
            let stacked = z1.vstack(&z2)?;
            let mut rng_k = Rng::substream(cfg.seed, stream::KMEANS, epoch as u64);
            let mut model = kmeans(&stacked, cfg.prototypes, cfg.kmeans_iters, &mut rng_k)?;
            concentration(&mut model, &stacked, cfg.epsilon)?;
            let mut rng_f = Rng::substream(cfg.seed, stream::FILTER, epoch as u64);
            let filter = build_negative_filter(&z1, &z2, &model, cfg.pool, &mut rng_f)?;
            (Some(filter), Some(model.inertia))
        };

        let res = info_nce(&z1, &z2, filter.as_ref(), cfg.tau, cfg.pool)?;
        let mut grads = backward(&params, &adj1, v1.features(), &cache1, &res.grad_z1)?;
        let g2 = backward(&params, &adj2, v2.features(), &cache2, &res.grad_z2)?;
        grads.accumulate(&g2)?;

        let EncoderParams { w1, w2, .. } = &mut params;
        adam.step(&mut [w1, w2], &[&grads.w1, &grads.w2], cfg.lr)?;

        let record = EpochRecord {
            epoch,
            loss: res.loss,
            filtered_fraction: filter
                .as_ref()
                .map_or(0.0, |f| f.dropped_fraction(cfg.pool)),
            kmeans_inertia: inertia,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        };
        on_epoch(&record, &params, &adam)?;
        log.push(record);
    }

    let adj = normalize_adjacency(g);
    let (embeddings, _) = forward(&params, &adj, g.features())?;
    Ok(TrainOutput {
        params,
        adam,
        embeddings,
        log,
    })
}
