//! Prototype discovery for negative filtering: k-means over the stacked
//! view embeddings, a per-cluster concentration estimate, and the
//! probability that a candidate negative is a true negative.
//!
//! Concentration `ξ_c` measures how tightly a cluster packs around its
//! centroid, discounted by cluster size: `ξ_c = Σ‖z−c‖ / (|Z_c|·ln(|Z_c| +
//! ε))`. Prototype similarity divides the plain dot product by `ξ`, so
//! diffuse clusters attract less. A candidate's keep probability is one
//! minus the softmax mass its own prototype similarities put on the
//! anchor's cluster: negatives that resemble the anchor's prototype are
//! likely false negatives and are filtered away.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Rng};

/// Numerical floor for `ξ` in similarity denominators; a cluster whose
/// members sit exactly on the centroid would otherwise divide by zero.
pub const XI_FLOOR: f64 = 1e-6;

/// Default size-discount constant in the concentration denominator.
pub const DEFAULT_EPSILON: f64 = 10.0;

/// Fitted prototypes. `concentrations` stays `None` until
/// [`concentration`] runs; filtering requires it.
#[derive(Clone, Debug)]
pub struct PrototypeModel {
    /// `K×d` centroid matrix.
    pub centroids: DenseMatrix,
    /// Cluster id per input point.
    pub assignments: Vec<usize>,
    /// Members per cluster; clusters can end up empty.
    pub counts: Vec<usize>,
    /// Final sum of squared point-to-assigned-centroid distances.
    pub inertia: f64,
    /// Inertia after each assignment pass (non-increasing).
    pub inertia_trace: Vec<f64>,
    /// `ξ_c` per cluster; `+∞` marks empty clusters, which all similarity
    /// computations skip.
    pub concentrations: Option<Vec<f64>>,
    /// The `ε` used to compute `concentrations`.
    pub epsilon: Option<f64>,
}

impl PrototypeModel {
    pub fn num_clusters(&self) -> usize {
        self.centroids.rows()
    }

    fn concentrations_or_err(&self) -> Result<&[f64]> {
        self.concentrations
            .as_deref()
            .ok_or_else(|| Error::invalid("concentrations have not been computed yet"))
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Assigns each point to its nearest centroid (squared Euclidean distance,
/// ties to the smaller cluster id). Returns (assignment, distance²) pairs.
fn assign_points(points: &DenseMatrix, centroids: &DenseMatrix) -> Vec<(usize, f64)> {
    let k = centroids.rows();
    (0..points.rows())
        .into_par_iter()
        .map(|i| {
            let row = points.row(i);
            let mut best = (0usize, f64::INFINITY);
            for c in 0..k {
                let d2 = sq_dist(row, centroids.row(c));
                if d2 < best.1 {
                    best = (c, d2);
                }
            }
            best
        })
        .collect()
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Ties in assignment go to the smaller cluster id. A cluster left empty
/// after an update is re-seeded to the point farthest from its currently
/// assigned centroid (distinct points for multiple empty clusters,
/// processed in ascending cluster id). Stops early once an assignment pass
/// changes nothing.
pub fn kmeans(
    points: &DenseMatrix,
    k: usize,
    iters: usize,
    rng: &mut Rng,
) -> Result<PrototypeModel> {
    let m = points.rows();
    let d = points.cols();
    if k < 1 {
        return Err(Error::invalid("cluster count must be at least 1"));
    }
    if m < k {
        return Err(Error::invalid(format!(
            "cannot fit {k} clusters to {m} points"
        )));
    }
    if iters < 1 {
        return Err(Error::invalid("iteration budget must be at least 1"));
    }
    if !points.is_finite() {
        return Err(Error::invalid("points must be finite"));
    }

    // k-means++ seeding: after the first uniform pick, each next centroid is
    // drawn proportionally to the squared distance from the chosen set.
    let mut centroids = DenseMatrix::zeros(k, d);
    let first = rng.below(m);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..m)
        .map(|i| sq_dist(points.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.uniform() * total;
            let mut cum = 0.0;
            let mut chosen = m - 1;
            for (i, &w) in d2.iter().enumerate() {
                cum += w;
                if cum > r {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is zero (duplicate-heavy input): uniform.
            rng.below(m)
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for (i, slot) in d2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points.row(i), centroids.row(c)));
        }
    }

    let mut assigned = assign_points(points, &centroids);
    let mut trace = vec![assigned.iter().map(|&(_, d2)| d2).sum::<f64>()];

    for _ in 0..iters {
        // Update step: means of the current members.
        let mut counts = vec![0usize; k];
        let mut sums = DenseMatrix::zeros(k, d);
        for (i, &(c, _)) in assigned.iter().enumerate() {
            counts[c] += 1;
            let row = sums.row_mut(c);
            for (s, v) in row.iter_mut().zip(points.row(i)) {
                *s += v;
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let inv = 1.0 / count as f64;
                for v in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *v.0 = v.1 * inv;
                }
            }
        }
        // Re-seed empty clusters to the farthest points (distance to their
        // own assigned centroid), distinct points in cluster-id order.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                assigned[b].1.partial_cmp(&assigned[a].1).unwrap().then(a.cmp(&b))
            });
            for (slot, &c) in empties.iter().enumerate() {
                let p = order[slot.min(m - 1)];
                centroids.row_mut(c).copy_from_slice(points.row(p));
            }
        }

        let next = assign_points(points, &centroids);
        trace.push(next.iter().map(|&(_, d2)| d2).sum::<f64>());
        let unchanged = next
            .iter()
            .zip(&assigned)
            .all(|(a, b)| a.0 == b.0);
        assigned = next;
        if unchanged {
            break;
        }
    }

    let mut counts = vec![0usize; k];
    for &(c, _) in &assigned {
        counts[c] += 1;
    }
    Ok(PrototypeModel {
        centroids,
        assignments: assigned.iter().map(|&(c, _)| c).collect(),
        counts,
        inertia: *trace.last().unwrap(),
        inertia_trace: trace,
        concentrations: None,
        epsilon: None,
    })
}

/// Fills `model.concentrations` from the points the model was fitted on.
/// `epsilon` must exceed 1 so singleton clusters keep a positive
/// denominator. Empty clusters get `+∞`.
pub fn concentration(model: &mut PrototypeModel, points: &DenseMatrix, epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 1.0 {
        return Err(Error::invalid(format!(
            "epsilon must exceed 1, got {epsilon}"
        )));
    }
    if points.rows() != model.assignments.len() || points.cols() != model.centroids.cols() {
        return Err(Error::invalid(
            "points do not match the shape the model was fitted on",
        ));
    }
    let k = model.num_clusters();
    let mut dist_sums = vec![0.0; k];
    for (i, &c) in model.assignments.iter().enumerate() {
        dist_sums[c] += sq_dist(points.row(i), model.centroids.row(c)).sqrt();
    }
    let xi: Vec<f64> = (0..k)
        .map(|c| {
            let n_c = model.counts[c];
            if n_c == 0 {
                f64::INFINITY
            } else {
                dist_sums[c] / (n_c as f64 * (n_c as f64 + epsilon).ln())
            }
        })
        .collect();
    model.concentrations = Some(xi);
    model.epsilon = Some(epsilon);
    Ok(())
}

/// Concentration-scaled prototype similarities `s(z, c) = z·c /
/// max(ξ_c, XI_FLOOR)` for one embedding; empty clusters yield `None`.
fn prototype_scores(z: &[f64], model: &PrototypeModel) -> Result<Vec<Option<f64>>> {
    let xi = model.concentrations_or_err()?;
    if z.len() != model.centroids.cols() {
        return Err(Error::invalid(format!(
            "embedding has dimension {}, centroids have {}",
            z.len(),
            model.centroids.cols()
        )));
    }
    Ok((0..model.num_clusters())
        .map(|c| {
            if xi[c].is_finite() {
                let dot: f64 = z.iter().zip(model.centroids.row(c)).map(|(a, b)| a * b).sum();
                Some(dot / xi[c].max(XI_FLOOR))
            } else {
                None
            }
        })
        .collect())
}

/// The cluster whose concentration-scaled similarity to `z` is largest;
/// ties go to the smaller cluster id. Empty clusters never win.
pub fn prototype_of(z: &[f64], model: &PrototypeModel) -> Result<usize> {
    let scores = prototype_scores(z, model)?;
    let mut best: Option<(usize, f64)> = None;
    for (c, s) in scores.iter().enumerate() {
        if let Some(s) = s {
            if best.is_none() || *s > best.unwrap().1 {
                best = Some((c, *s));
            }
        }
    }
    best.map(|(c, _)| c)
        .ok_or_else(|| Error::numerical("all clusters are empty", None))
}

/// Softmax of `z`'s prototype similarities over the non-empty clusters
/// (empty clusters get probability 0). Max-subtraction keeps symmetric
/// cases exact: equal scores yield exactly equal probabilities.
pub fn prototype_softmax(z: &[f64], model: &PrototypeModel) -> Result<Vec<f64>> {
    let scores = prototype_scores(z, model)?;
    let max = scores
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::numerical("all clusters are empty", None));
    }
    let exps: Vec<f64> = scores
        .iter()
        .map(|s| s.map_or(0.0, |v| (v - max).exp()))
        .collect();
    let denom: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / denom).collect())
}

/// Keep probability of each candidate row as a negative for `anchor`:
/// `1 − softmax(s(z_j, ·))[cluster(anchor)]`. With a single cluster this is
/// exactly 0 (everything resembles the only prototype); with two clusters
/// and symmetric similarities it is exactly 0.5.
pub fn negative_keep_probs(
    anchor: &[f64],
    candidates: &DenseMatrix,
    model: &PrototypeModel,
) -> Result<Vec<f64>> {
    let anchor_cluster = prototype_of(anchor, model)?;
    (0..candidates.rows())
        .map(|j| {
            let soft = prototype_softmax(candidates.row(j), model)?;
            Ok(1.0 - soft[anchor_cluster])
        })
        .collect()
}

/// One Bernoulli draw per probability, in order. True means "keep".
pub fn sample_filter(probs: &[f64], rng: &mut Rng) -> Vec<bool> {
    probs.iter().map(|&p| rng.bernoulli(p)).collect()
}
