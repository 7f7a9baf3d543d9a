//! Adaptive stochastic perturbation: degree-aware edge dropping and feature
//! masking used to draw the two stochastic views each epoch.
//!
//! Importance weights protect structure the graph cannot afford to lose:
//! an edge weighs `ln(1 + min(deg u, deg v))` and a feature dimension
//! weighs the degree-weighted magnitude of its column. The drop probability
//! of each item scales with how far its weight sits below the family
//! maximum and is capped at `p_tau`, so important items are dropped rarely
//! and nothing is ever dropped with certainty.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::{DenseMatrix, Rng};

/// Base rates and cap for the perturbation family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbConfig {
    /// Base feature-mask probability.
    pub p_f: f64,
    /// Base edge-drop probability.
    pub p_e: f64,
    /// Upper cap applied to every drop probability.
    pub p_tau: f64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            p_f: 0.2,
            p_e: 0.3,
            p_tau: 0.7,
        }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_f", self.p_f), ("p_e", self.p_e)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1), got {p}"
                )));
            }
        }
        if !(self.p_tau > 0.0 && self.p_tau <= 1.0) {
            return Err(Error::invalid(format!(
                "p_tau must lie in (0, 1], got {}",
                self.p_tau
            )));
        }
        Ok(())
    }
}

/// Drop probabilities for one graph: `edge_probs` follows the canonical
/// `edge_list()` order (pairs `u < v`, lexicographic) and `feature_probs`
/// follows ascending dimension order.
#[derive(Clone, Debug)]
pub struct AdaptiveWeights {
    pub feature_probs: Vec<f64>,
    pub edge_probs: Vec<f64>,
}

/// Guard against division by zero when every weight in a family is equal
/// (e.g. regular graphs); the numerator is zero there, so probabilities
/// collapse to exactly 0.
const NORM_EPS: f64 = 1e-12;

fn normalize_family(weights: &[f64], p_base: f64, p_tau: f64) -> Vec<f64> {
    if weights.is_empty() {
        return Vec::new();
    }
    let w_max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w_mean = weights.iter().sum::<f64>() / weights.len() as f64;
    weights
        .iter()
        .map(|&w| (((w_max - w) / (w_max - w_mean + NORM_EPS)) * p_base).min(p_tau))
        .collect()
}

/// Computes the drop probabilities for `g`. Structural (unweighted) degrees
/// drive both families; these are fixed per graph and reused every epoch.
pub fn adaptive_weights(g: &Graph, cfg: &PerturbConfig) -> Result<AdaptiveWeights> {
    cfg.validate()?;
    let deg = g.degrees().per_node;
    let log_deg: Vec<f64> = deg.iter().map(|&d| (1.0 + d as f64).ln()).collect();

    let edge_weights: Vec<f64> = g
        .edge_list()
        .iter()
        .map(|&(u, v)| (1.0 + deg[u].min(deg[v]) as f64).ln())
        .collect();

    let x = g.features();
    let mut feature_weights = vec![0.0; g.feature_dim()];
    for (u, &ld) in log_deg.iter().enumerate() {
        for (t, &v) in x.row(u).iter().enumerate() {
            feature_weights[t] += v.abs() * ld;
        }
    }

    Ok(AdaptiveWeights {
        feature_probs: normalize_family(&feature_weights, cfg.p_f, cfg.p_tau),
        edge_probs: normalize_family(&edge_weights, cfg.p_e, cfg.p_tau),
    })
}

/// Draws one perturbed view of `g`.
///
/// One feature mask is sampled per call (dimension order, one Bernoulli
/// each) and shared by all nodes, so masked columns are zero for every
/// node. Edge decisions follow, one per undirected edge in `edge_list()`
/// order. Kept edges keep their weights; labels are carried over.
pub fn perturb(g: &Graph, weights: &AdaptiveWeights, rng: &mut Rng) -> Result<Graph> {
    let d = g.feature_dim();
    let edges = g.edge_list();
    if weights.feature_probs.len() != d {
        return Err(Error::invalid(format!(
            "feature probabilities cover {} dimensions but the graph has {d}",
            weights.feature_probs.len()
        )));
    }
    if weights.edge_probs.len() != edges.len() {
        return Err(Error::invalid(format!(
            "edge probabilities cover {} edges but the graph has {}",
            weights.edge_probs.len(),
            edges.len()
        )));
    }

    let mask: Vec<bool> = weights
        .feature_probs
        .iter()
        .map(|&p| !rng.bernoulli(p))
        .collect();
    let kept: Vec<(usize, usize, f64)> = edges
        .iter()
        .zip(&weights.edge_probs)
        .filter(|&(_, &p)| !rng.bernoulli(p))
        .map(|(&(u, v), _)| (u, v, g.edge_weight(u, v).unwrap_or(1.0)))
        .collect();

    let x = g.features();
    let masked = DenseMatrix::from_fn(g.num_nodes(), d, |i, t| {
        if mask[t] {
            x.get(i, t)
        } else {
            0.0
        }
    });

    let labels = g.labels().map(|l| l.to_vec());
    if g.is_weighted() {
        Graph::new_weighted(masked, labels, &kept)
    } else {
        let unweighted: Vec<(usize, usize)> = kept.iter().map(|&(u, v, _)| (u, v)).collect();
        Graph::new(masked, labels, &unweighted)
    }
}
