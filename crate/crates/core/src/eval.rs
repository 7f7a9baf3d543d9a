//! Downstream evaluation of frozen embeddings: a logistic probe for label
//! accuracy, k-means agreement scores (NMI, homogeneity), and neighborhood
//! label purity (`sim@n`).
//!
//! All randomness is seeded: splits, probe repetitions, and clustering
//! restarts derive substreams from the caller's seed, so any reported
//! number can be reproduced exactly.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::contrast::prototype::kmeans;
use crate::error::{Error, Result};
use crate::numerics::rng::stream;
use crate::numerics::{AdamState, DenseMatrix, Rng};

/// Disjoint node index sets; together they cover every node.
#[derive(Clone, Debug)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified train/val/test split. `fractions = (train, val)` are applied
/// per class with at-least-one rounding, so every class appears in every
/// bucket; classes with fewer than 3 members cannot satisfy that and are
/// rejected.
pub fn make_split(labels: &[usize], fractions: (f64, f64), seed: u64) -> Result<Split> {
    let (f_train, f_val) = fractions;
    if !(f_train > 0.0 && f_val > 0.0 && f_train + f_val < 1.0) {
        return Err(Error::invalid(format!(
            "split fractions must be positive and sum below 1, got ({f_train}, {f_val})"
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("cannot split zero nodes"));
    }
    let num_classes = labels.iter().max().unwrap() + 1;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }

    let mut rng = Rng::substream(seed, stream::SPLIT, 0);
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (class, mut idx) in members.into_iter().enumerate() {
        let n_c = idx.len();
        if n_c < 3 {
            return Err(Error::invalid(format!(
                "class {class} has {n_c} members; stratification needs at least 3"
            )));
        }
        rng.shuffle(&mut idx);
        let mut n_t = ((f_train * n_c as f64).round() as usize).max(1);
        let mut n_v = ((f_val * n_c as f64).round() as usize).max(1);
        while n_t + n_v >= n_c {
            if n_t >= n_v && n_t > 1 {
                n_t -= 1;
            } else {
                n_v -= 1;
            }
        }
        split.train.extend(&idx[..n_t]);
        split.val.extend(&idx[n_t..n_t + n_v]);
        split.test.extend(&idx[n_t + n_v..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Linear probe settings.
#[derive(Clone, Debug)]
pub struct ProbeOptions {
    /// (train, val) fractions for the per-repetition splits.
    pub fractions: (f64, f64),
    /// L2 penalty on the weight matrix (the bias is unpenalized).
    pub l2: f64,
    /// Independent repetitions over fresh splits.
    pub reps: usize,
    /// Adam learning rate.
    pub lr: f64,
    pub max_epochs: usize,
    /// Early-stopping patience in validation checks.
    pub patience: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            fractions: (0.1, 0.1),
            l2: 1e-4,
            reps: 20,
            lr: 0.01,
            max_epochs: 1000,
            patience: 20,
            seed: 0,
        }
    }
}

/// Accuracy across probe repetitions: sample standard deviation (0 when
/// `reps == 1`); `train_mean` supports sanity checks against leakage.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub mean: f64,
    pub std: f64,
    pub train_mean: f64,
    pub per_rep: Vec<f64>,
}

fn gather_rows(m: &DenseMatrix, idx: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(idx.len(), m.cols(), |r, c| m.get(idx[r], c))
}

/// Fraction of rows whose argmax logit (ties to the smaller class) matches
/// the label.
fn logit_accuracy(x: &DenseMatrix, labels: &[usize], w: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let logits = x.matmul(w).expect("probe shapes are checked upfront");
    let mut correct = 0usize;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.row(i);
        let mut best = 0usize;
        for c in 1..row.len() {
            if row[c] + b.get(0, c) > row[best] + b.get(0, best) {
                best = c;
            }
        }
        if best == y {
            correct += 1;
        }
    }
    correct as f64 / labels.len().max(1) as f64
}

/// Multinomial logistic regression on frozen embeddings, full-batch Adam
/// with early stopping on validation accuracy, repeated over fresh
/// stratified splits. The learned model is a weight matrix plus bias; the
/// embeddings never receive gradients.
pub fn logistic_probe(
    emb: &DenseMatrix,
    labels: &[usize],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if emb.rows() != labels.len() {
        return Err(Error::invalid(format!(
            "{} embeddings vs {} labels",
            emb.rows(),
            labels.len()
        )));
    }
    if opts.reps == 0 {
        return Err(Error::invalid("probe repetitions must be positive"));
    }
    if !opts.l2.is_finite() || opts.l2 < 0.0 || !opts.lr.is_finite() || opts.lr <= 0.0 {
        return Err(Error::invalid("probe l2 must be >= 0 and lr > 0"));
    }
    let d = emb.cols();
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);

    let mut per_rep = Vec::with_capacity(opts.reps);
    let mut train_accs = Vec::with_capacity(opts.reps);
    for rep in 0..opts.reps {
        let split_seed = Rng::substream(opts.seed, stream::PROBE, rep as u64).next_u64();
        let split = make_split(labels, opts.fractions, split_seed)?;
        let train_labels: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
        {
            let mut distinct = train_labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(Error::invalid(
                    "training split is single-class; the probe is undefined",
                ));
            }
        }
        let val_labels: Vec<usize> = split.val.iter().map(|&i| labels[i]).collect();
        let test_labels: Vec<usize> = split.test.iter().map(|&i| labels[i]).collect();
        let x_train = gather_rows(emb, &split.train);
        let x_val = gather_rows(emb, &split.val);
        let x_test = gather_rows(emb, &split.test);
        let n_train = x_train.rows() as f64;

        // Convex objective: zero init is deterministic and sufficient.
        let mut w = DenseMatrix::zeros(d, num_classes);
        let mut b = DenseMatrix::zeros(1, num_classes);
        let mut adam = AdamState::new(&[&w, &b]);
        let mut best = (w.clone(), b.clone());
        let mut best_val = f64::NEG_INFINITY;
        let mut patience = opts.patience;

        for _ in 0..opts.max_epochs {
            // Softmax cross-entropy gradient, full batch.
            let logits = x_train.matmul(&w)?;
            let mut d_logits = DenseMatrix::zeros(x_train.rows(), num_classes);
            for (i, &label) in train_labels.iter().enumerate() {
                let row = logits.row(i);
                let mut max = f64::NEG_INFINITY;
                for (c, &l) in row.iter().enumerate() {
                    max = max.max(l + b.get(0, c));
                }
                let mut denom = 0.0;
                for (c, &l) in row.iter().enumerate() {
                    denom += (l + b.get(0, c) - max).exp();
                }
                let out = d_logits.row_mut(i);
                for (c, &l) in row.iter().enumerate() {
                    let p = (l + b.get(0, c) - max).exp() / denom;
                    out[c] = (p - if c == label { 1.0 } else { 0.0 }) / n_train;
                }
            }
            let mut d_w = x_train.transpose_matmul(&d_logits)?;
            d_w.axpy(opts.l2, &w)?;
            let mut d_b = DenseMatrix::zeros(1, num_classes);
            for i in 0..d_logits.rows() {
                for c in 0..num_classes {
                    d_b.set(0, c, d_b.get(0, c) + d_logits.get(i, c));
                }
            }
            adam.step(&mut [&mut w, &mut b], &[&d_w, &d_b], opts.lr)?;

            let val_acc = logit_accuracy(&x_val, &val_labels, &w, &b);
            if val_acc > best_val {
                best_val = val_acc;
                best = (w.clone(), b.clone());
                patience = opts.patience;
            } else {
                patience -= 1;
                if patience == 0 {
                    break;
                }
            }
        }

        per_rep.push(logit_accuracy(&x_test, &test_labels, &best.0, &best.1));
        train_accs.push(logit_accuracy(&x_train, &train_labels, &best.0, &best.1));
    }

    let mean = per_rep.iter().sum::<f64>() / per_rep.len() as f64;
    let std = if per_rep.len() > 1 {
        (per_rep.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>()
            / (per_rep.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    Ok(ProbeReport {
        mean,
        std,
        train_mean: train_accs.iter().sum::<f64>() / train_accs.len() as f64,
        per_rep,
    })
}

/// Normalization for mutual information.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NmiNorm {
    /// `I / sqrt(H(Y)·H(Ŷ))` (the default).
    Geometric,
    /// `2I / (H(Y) + H(Ŷ))`.
    Arithmetic,
}

struct Contingency {
    /// `counts[y][c]` over (label, prediction) pairs.
    counts: Vec<Vec<usize>>,
    n: usize,
}

impl Contingency {
    fn build(labels: &[usize], preds: &[usize]) -> Result<Contingency> {
        if labels.len() != preds.len() || labels.is_empty() {
            return Err(Error::invalid(
                "labelings must be nonempty and equally long",
            ));
        }
        let ny = labels.iter().max().unwrap() + 1;
        let nc = preds.iter().max().unwrap() + 1;
        let mut counts = vec![vec![0usize; nc]; ny];
        for (&y, &c) in labels.iter().zip(preds) {
            counts[y][c] += 1;
        }
        Ok(Contingency {
            counts,
            n: labels.len(),
        })
    }

    fn label_entropy(&self) -> f64 {
        let n = self.n as f64;
        self.counts
            .iter()
            .map(|row| row.iter().sum::<usize>())
            .filter(|&s| s > 0)
            .map(|s| {
                let p = s as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    fn pred_entropy(&self) -> f64 {
        let n = self.n as f64;
        let nc = self.counts[0].len();
        (0..nc)
            .map(|c| self.counts.iter().map(|row| row[c]).sum::<usize>())
            .filter(|&s| s > 0)
            .map(|s| {
                let p = s as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        let nc = self.counts[0].len();
        let row_sums: Vec<usize> = self.counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<usize> = (0..nc)
            .map(|c| self.counts.iter().map(|row| row[c]).sum())
            .collect();
        let mut info = 0.0;
        for (y, row) in self.counts.iter().enumerate() {
            for (c, &cnt) in row.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                let p_yc = cnt as f64 / n;
                info += p_yc
                    * (p_yc / (row_sums[y] as f64 / n * (col_sums[c] as f64 / n))).ln();
            }
        }
        info.max(0.0)
    }
}

/// Normalized mutual information between a ground-truth labeling and a
/// predicted clustering, in `[0, 1]`. Degenerate cases: both labelings
/// trivial (single value) score 1; exactly one trivial scores 0.
pub fn nmi(labels: &[usize], preds: &[usize], norm: NmiNorm) -> Result<f64> {
    let table = Contingency::build(labels, preds)?;
    let (hy, hc) = (table.label_entropy(), table.pred_entropy());
    if hy == 0.0 && hc == 0.0 {
        return Ok(1.0);
    }
    if hy == 0.0 || hc == 0.0 {
        return Ok(0.0);
    }
    let info = table.mutual_information();
    let score = match norm {
        NmiNorm::Geometric => info / (hy * hc).sqrt(),
        NmiNorm::Arithmetic => 2.0 * info / (hy + hc),
    };
    Ok(score.clamp(0.0, 1.0))
}

/// Homogeneity `1 − H(Y|Ŷ)/H(Y)`: 1 when every cluster holds a single
/// class, and 1 by convention when the ground truth itself is single-class.
pub fn homogeneity(labels: &[usize], preds: &[usize]) -> Result<f64> {
    let table = Contingency::build(labels, preds)?;
    let hy = table.label_entropy();
    if hy == 0.0 {
        return Ok(1.0);
    }
    let h_cond = hy - table.mutual_information();
    Ok((1.0 - h_cond / hy).clamp(0.0, 1.0))
}

/// Clustering evaluation settings.
#[derive(Clone, Debug)]
pub struct ClusteringOptions {
    /// Cluster count; `None` uses the number of label classes.
    pub clusters: Option<usize>,
    /// Restarts; the run with the lowest inertia wins (first on ties).
    pub reps: usize,
    pub kmeans_iters: usize,
    pub seed: u64,
    pub norm: NmiNorm,
}

impl Default for ClusteringOptions {
    fn default() -> Self {
        ClusteringOptions {
            clusters: None,
            reps: 10,
            kmeans_iters: 100,
            seed: 0,
            norm: NmiNorm::Geometric,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusteringReport {
    pub nmi: f64,
    pub homogeneity: f64,
    pub inertia: f64,
}

/// Clusters the embeddings and scores the best-of-`reps` assignment
/// against the labels.
pub fn clustering_scores(
    emb: &DenseMatrix,
    labels: &[usize],
    opts: &ClusteringOptions,
) -> Result<ClusteringReport> {
    if emb.rows() != labels.len() || labels.is_empty() {
        return Err(Error::invalid("embeddings and labels must align"));
    }
    if opts.reps == 0 {
        return Err(Error::invalid("clustering repetitions must be positive"));
    }
    let k = opts
        .clusters
        .unwrap_or_else(|| labels.iter().max().unwrap() + 1);

    let mut best: Option<(f64, Vec<usize>)> = None;
    for rep in 0..opts.reps {
        let mut rng = Rng::substream(opts.seed, stream::EVAL_KMEANS, rep as u64);
        let model = kmeans(emb, k, opts.kmeans_iters, &mut rng)?;
        if best.as_ref().is_none_or(|(i, _)| model.inertia < *i) {
            best = Some((model.inertia, model.assignments));
        }
    }
    let (inertia, assignments) = best.expect("reps >= 1 guarantees a run");
    Ok(ClusteringReport {
        nmi: nmi(labels, &assignments, opts.norm)?,
        homogeneity: homogeneity(labels, &assignments)?,
        inertia,
    })
}

/// Mean fraction of each node's `n` most cosine-similar other nodes that
/// share its label, for every requested `n` (each must satisfy
/// `1 ≤ n < N`). Ranking ties break toward the smaller node index.
pub fn sim_at_n(
    emb: &DenseMatrix,
    labels: &[usize],
    ns: &[usize],
) -> Result<BTreeMap<usize, f64>> {
    let n_nodes = emb.rows();
    if n_nodes != labels.len() || n_nodes == 0 {
        return Err(Error::invalid("embeddings and labels must align"));
    }
    if ns.is_empty() {
        return Err(Error::invalid("no neighborhood sizes requested"));
    }
    for &n in ns {
        if n == 0 || n >= n_nodes {
            return Err(Error::invalid(format!(
                "sim@n needs 1 <= n < {n_nodes}, got {n}"
            )));
        }
    }
    let max_n = *ns.iter().max().unwrap();
    let (unit, _) = emb.row_l2_normalized();
    let sims = unit.matmul_transpose_b(&unit)?;

    use rayon::prelude::*;
    let hits: Vec<Vec<usize>> = (0..n_nodes)
        .into_par_iter()
        .map(|i| {
            let row = sims.row(i);
            let mut order: Vec<usize> = (0..n_nodes).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            order.truncate(max_n);
            ns.iter()
                .map(|&n| {
                    order[..n]
                        .iter()
                        .filter(|&&j| labels[j] == labels[i])
                        .count()
                })
                .collect()
        })
        .collect();

    let mut scores = BTreeMap::new();
    for (slot, &n) in ns.iter().enumerate() {
        let total: usize = hits.iter().map(|h| h[slot]).sum();
        scores.insert(n, total as f64 / (n_nodes * n) as f64);
    }
    Ok(scores)
}

/// Bundle of everything the evaluation command reports.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub train_accuracy_mean: f64,
    pub nmi: f64,
    pub homogeneity: f64,
    pub sim_at: BTreeMap<usize, f64>,
}

/// Composite evaluation options.
#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub probe: ProbeOptions,
    pub clustering: ClusteringOptions,
    pub sim_ns: Vec<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            probe: ProbeOptions::default(),
            clustering: ClusteringOptions::default(),
            sim_ns: vec![5, 10],
        }
    }
}

/// Runs probe, clustering, and neighborhood purity on one embedding matrix.
pub fn evaluate(emb: &DenseMatrix, labels: &[usize], opts: &EvalOptions) -> Result<EvalReport> {
    let probe = logistic_probe(emb, labels, &opts.probe)?;
    let clustering = clustering_scores(emb, labels, &opts.clustering)?;
    let sim_at = sim_at_n(emb, labels, &opts.sim_ns)?;
    Ok(EvalReport {
        accuracy_mean: probe.mean,
        accuracy_std: probe.std,
        train_accuracy_mean: probe.train_mean,
        nmi: clustering.nmi,
        homogeneity: clustering.homogeneity,
        sim_at,
    })
}
