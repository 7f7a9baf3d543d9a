//! Sampled negative-filter state for one epoch: which candidate negatives
//! each anchor keeps, plus the keep probabilities they were drawn from.
//!
//! Anchors and candidates live in two views of N nodes each. Candidates
//! split into inter-view (the other view's embedding of every other node)
//! and intra-view (this view's embedding of every other node). Positive
//! pairs (the same node across views) and self-pairs are never part of the
//! negative pool, so the mask diagonals are meaningless and stay unset.

use crate::contrast::bitmat::BitMatrix;
use crate::contrast::prototype::{prototype_of, prototype_softmax, PrototypeModel};
use crate::contrast::NegativePool;
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Rng};

/// Keep masks for all four (anchor view, candidate view) combinations and
/// the factored probabilities behind them. `keep_12[i][j]` is anchor `i` of
/// view 1 keeping candidate `j` of view 2, and so on.
#[derive(Clone, Debug)]
pub struct NegativeFilter {
    pub keep_12: BitMatrix,
    pub keep_11: BitMatrix,
    pub keep_21: BitMatrix,
    pub keep_22: BitMatrix,
    /// Per-candidate softmax over non-empty clusters, rows 0..N for view 1
    /// followed by rows N..2N for view 2; empty for [`keep_all`].
    cluster_softmax: DenseMatrix,
    /// Prototype cluster of each stacked embedding (same row order).
    anchor_cluster: Vec<usize>,
}

impl NegativeFilter {
    /// A filter that keeps every candidate; useful as the identity element
    /// (filtered loss with this filter equals the unfiltered loss exactly).
    pub fn keep_all(n: usize) -> NegativeFilter {
        NegativeFilter {
            keep_12: BitMatrix::ones(n, n),
            keep_11: BitMatrix::ones(n, n),
            keep_21: BitMatrix::ones(n, n),
            keep_22: BitMatrix::ones(n, n),
            cluster_softmax: DenseMatrix::zeros(0, 0),
            anchor_cluster: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.keep_12.rows()
    }

    /// Probability with which the sampled bit for (anchor, candidate) was
    /// drawn. Views are 0 or 1. Returns 1 for `keep_all` filters.
    pub fn keep_prob(
        &self,
        anchor_view: usize,
        anchor: usize,
        cand_view: usize,
        cand: usize,
    ) -> f64 {
        if self.anchor_cluster.is_empty() {
            return 1.0;
        }
        let n = self.num_nodes();
        let a = anchor_view * n + anchor;
        let c = cand_view * n + cand;
        1.0 - self.cluster_softmax.get(c, self.anchor_cluster[a])
    }

    /// Fraction of the candidate pool that was dropped. Diagonal bits are
    /// excluded: they correspond to positives and self-pairs, which are
    /// never negatives.
    pub fn dropped_fraction(&self, pool: NegativePool) -> f64 {
        let n = self.num_nodes();
        if n <= 1 {
            return 0.0;
        }
        let off_diag = |m: &BitMatrix| {
            let diag = (0..n).filter(|&r| m.get(r, r)).count();
            m.count_ones() - diag
        };
        let (kept, total) = match pool {
            NegativePool::InterAndIntra => (
                off_diag(&self.keep_12)
                    + off_diag(&self.keep_21)
                    + off_diag(&self.keep_11)
                    + off_diag(&self.keep_22),
                2 * n * (2 * n - 2),
            ),
            NegativePool::InterOnly => (
                off_diag(&self.keep_12) + off_diag(&self.keep_21),
                2 * n * (n - 1),
            ),
        };
        1.0 - kept as f64 / total as f64
    }
}

/// Samples a fresh filter from prototype keep probabilities.
///
/// `model` must be fitted on the stacked embeddings (view 1 rows then
/// view 2 rows) with concentrations computed. Bernoulli draws consume one
/// uniform per (anchor, candidate) pair in a fixed order: inter-view mask
/// of view-1 anchors row by row, then intra-view of view 1, then inter of
/// view 2, then intra of view 2, skipping positives and self-pairs. With
/// [`NegativePool::InterOnly`] the intra masks stay empty and consume no
/// draws.
pub fn build_negative_filter(
    z1: &DenseMatrix,
    z2: &DenseMatrix,
    model: &PrototypeModel,
    pool: NegativePool,
    rng: &mut Rng,
) -> Result<NegativeFilter> {
    if z1.rows() != z2.rows() || z1.cols() != z2.cols() {
        return Err(Error::invalid("view embeddings must share a shape"));
    }
    let n = z1.rows();
    let stacked_row = |g: usize| if g < n { z1.row(g) } else { z2.row(g - n) };

    let k = model.num_clusters();
    let mut cluster_softmax = DenseMatrix::zeros(2 * n, k);
    let mut anchor_cluster = Vec::with_capacity(2 * n);
    for g in 0..2 * n {
        let row = stacked_row(g);
        cluster_softmax
            .row_mut(g)
            .copy_from_slice(&prototype_softmax(row, model)?);
        anchor_cluster.push(prototype_of(row, model)?);
    }

    let mut filter = NegativeFilter {
        keep_12: BitMatrix::zeros(n, n),
        keep_11: BitMatrix::zeros(n, n),
        keep_21: BitMatrix::zeros(n, n),
        keep_22: BitMatrix::zeros(n, n),
        cluster_softmax,
        anchor_cluster,
    };

    // (mask, anchor view, candidate view) in canonical sampling order.
    let sample = |mask: &mut BitMatrix,
                      anchor_view: usize,
                      cand_view: usize,
                      softmax: &DenseMatrix,
                      clusters: &[usize],
                      rng: &mut Rng| {
        for a in 0..n {
            let cluster = clusters[anchor_view * n + a];
            for c in 0..n {
                if a == c {
                    continue;
                }
                let p = 1.0 - softmax.get(cand_view * n + c, cluster);
                mask.set(a, c, rng.bernoulli(p));
            }
        }
    };

    let softmax = filter.cluster_softmax.clone();
    let clusters = filter.anchor_cluster.clone();
    sample(&mut filter.keep_12, 0, 1, &softmax, &clusters, rng);
    if pool == NegativePool::InterAndIntra {
        sample(&mut filter.keep_11, 0, 0, &softmax, &clusters, rng);
    }
    sample(&mut filter.keep_21, 1, 0, &softmax, &clusters, rng);
    if pool == NegativePool::InterAndIntra {
        sample(&mut filter.keep_22, 1, 1, &softmax, &clusters, rng);
    }
    Ok(filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrast::prototype::{concentration, kmeans};
    use crate::numerics::Rng;

    /// Two tight, well-separated blobs of unit vectors split across views.
    fn blob_views(n: usize, seed: u64) -> (DenseMatrix, DenseMatrix) {
        let mut rng = Rng::seed_from(seed);
        let make = |rng: &mut Rng| {
            DenseMatrix::from_fn(n, 2, |i, t| {
                let base: [f64; 2] = if i % 2 == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
                base[t] + 0.05 * rng.normal()
            })
        };
        (make(&mut rng), make(&mut rng))
    }

    fn fitted_model(z1: &DenseMatrix, z2: &DenseMatrix, k: usize, seed: u64) -> PrototypeModel {
        let stacked = z1.vstack(z2).unwrap();
        let mut model = kmeans(&stacked, k, 50, &mut Rng::seed_from(seed)).unwrap();
        concentration(&mut model, &stacked, 10.0).unwrap();
        model
    }

    #[test]
    fn keep_all_keeps_everything() {
        let f = NegativeFilter::keep_all(5);
        assert_eq!(f.keep_12.count_ones(), 25);
        assert_eq!(f.keep_prob(0, 2, 1, 3), 1.0);
        assert_eq!(f.dropped_fraction(NegativePool::InterAndIntra), 0.0);
    }

    /// Hand-built model with moderate concentrations so keep probabilities
    /// stay strictly interior (a tightly fitted model saturates them).
    fn moderate_model() -> PrototypeModel {
        PrototypeModel {
            centroids: DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            assignments: Vec::new(),
            counts: vec![6, 6],
            inertia: 0.0,
            inertia_trace: vec![0.0],
            concentrations: Some(vec![0.5, 0.5]),
            epsilon: Some(10.0),
        }
    }

    #[test]
    fn sampled_bits_match_reported_probabilities() {
        // Binomial check aggregated over a fixed (anchor, candidate) cell
        // across many sampled filters.
        let mut rng = Rng::seed_from(1);
        let z1 = DenseMatrix::from_fn(6, 2, |_, _| rng.normal()).row_l2_normalized().0;
        let z2 = DenseMatrix::from_fn(6, 2, |_, _| rng.normal()).row_l2_normalized().0;
        let model = moderate_model();
        let mut kept = 0usize;
        let trials = 10_000;
        let mut p_cell = None;
        for t in 0..trials {
            let mut rng = Rng::seed_from(1000 + t as u64);
            let f =
                build_negative_filter(&z1, &z2, &model, NegativePool::InterAndIntra, &mut rng)
                    .unwrap();
            let p = f.keep_prob(0, 0, 1, 1);
            if let Some(prev) = p_cell {
                assert_eq!(p, prev, "probabilities are a function of the model");
            }
            p_cell = Some(p);
            if f.keep_12.get(0, 1) {
                kept += 1;
            }
        }
        let p = p_cell.unwrap();
        assert!(p > 0.0 && p < 1.0, "degenerate test setup: p = {p}");
        let expect = p * trials as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (kept as f64 - expect).abs() < 4.0 * sigma,
            "kept {kept}, expected {expect:.0} ± {:.0}",
            4.0 * sigma
        );
    }

    #[test]
    fn kept_bits_imply_positive_probability() {
        let (z1, z2) = blob_views(8, 3);
        let model = fitted_model(&z1, &z2, 3, 4);
        let f = build_negative_filter(
            &z1,
            &z2,
            &model,
            NegativePool::InterAndIntra,
            &mut Rng::seed_from(9),
        )
        .unwrap();
        for a in 0..8 {
            for c in 0..8 {
                if a == c {
                    continue;
                }
                if f.keep_12.get(a, c) {
                    assert!(f.keep_prob(0, a, 1, c) > 0.0);
                }
                if f.keep_11.get(a, c) {
                    assert!(f.keep_prob(0, a, 0, c) > 0.0);
                }
            }
        }
    }

    #[test]
    fn inter_only_pool_skips_intra_masks() {
        let (z1, z2) = blob_views(5, 5);
        let model = fitted_model(&z1, &z2, 2, 6);
        let f = build_negative_filter(
            &z1,
            &z2,
            &model,
            NegativePool::InterOnly,
            &mut Rng::seed_from(7),
        )
        .unwrap();
        assert_eq!(f.keep_11.count_ones(), 0);
        assert_eq!(f.keep_22.count_ones(), 0);
        assert!(f.keep_12.count_ones() > 0);
    }

    #[test]
    fn same_stream_is_reproducible() {
        let (z1, z2) = blob_views(7, 8);
        let model = fitted_model(&z1, &z2, 2, 9);
        let a = build_negative_filter(
            &z1,
            &z2,
            &model,
            NegativePool::InterAndIntra,
            &mut Rng::seed_from(42),
        )
        .unwrap();
        let b = build_negative_filter(
            &z1,
            &z2,
            &model,
            NegativePool::InterAndIntra,
            &mut Rng::seed_from(42),
        )
        .unwrap();
        assert_eq!(a.keep_12, b.keep_12);
        assert_eq!(a.keep_11, b.keep_11);
        assert_eq!(a.keep_21, b.keep_21);
        assert_eq!(a.keep_22, b.keep_22);
    }

    #[test]
    fn single_cluster_filters_every_candidate() {
        // K = 1 forces keep probability 0 everywhere: all masks empty.
        let (z1, z2) = blob_views(6, 10);
        let model = fitted_model(&z1, &z2, 1, 11);
        let f = build_negative_filter(
            &z1,
            &z2,
            &model,
            NegativePool::InterAndIntra,
            &mut Rng::seed_from(12),
        )
        .unwrap();
        assert_eq!(
            f.keep_12.count_ones()
                + f.keep_11.count_ones()
                + f.keep_21.count_ones()
                + f.keep_22.count_ones(),
            0
        );
        assert_eq!(f.dropped_fraction(NegativePool::InterAndIntra), 1.0);
    }
}
