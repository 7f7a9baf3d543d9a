//! Normalized-temperature contrastive loss over two views with an optional
//! sampled negative filter, plus a diagnostic for the small-spread Taylor
//! behavior of the per-anchor partition sum.
//!
//! For anchor `i` in one view, the positive is the same node in the other
//! view and the negative pool holds every other node from the other view
//! (inter) and optionally this view (intra). The per-anchor term is
//! `−log softmax` of the positive against the pool at temperature `τ`; the
//! total averages both directions over `2N` anchors. Because embeddings are
//! row-normalized upstream, plain dot products act as cosine similarities.
//!
//! Gradients flow through every similarity (anchor and candidate sides).
//! They are assembled from per-row softmax coefficient matrices so each
//! entry is written by exactly one row pass — bit-identical results for any
//! thread count.

use rayon::prelude::*;

use crate::contrast::bitmat::BitMatrix;
use crate::contrast::filter::NegativeFilter;
use crate::contrast::NegativePool;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Loss value and gradients with respect to both embedding matrices.
#[derive(Clone, Debug)]
pub struct InfoNceResult {
    pub loss: f64,
    pub grad_z1: DenseMatrix,
    pub grad_z2: DenseMatrix,
}

struct DirectionMasks<'a> {
    inter: Option<&'a BitMatrix>,
    intra: Option<&'a BitMatrix>,
}

/// One direction: anchors from one view against inter (other view) and
/// intra (same view) candidates. `inter`/`intra` hold similarities on input
/// and softmax coefficients (scaled by `scale`) on output. Returns the sum
/// of per-anchor losses.
fn direction_pass(
    inter: &mut DenseMatrix,
    intra: &mut DenseMatrix,
    masks: &DirectionMasks<'_>,
    use_intra: bool,
    tau: f64,
    scale: f64,
) -> f64 {
    let n = inter.rows();
    let losses: Vec<f64> = inter
        .data_mut()
        .par_chunks_mut(n)
        .zip(intra.data_mut().par_chunks_mut(n))
        .enumerate()
        .map(|(i, (inter_row, intra_row))| {
            let kept_inter = |j: usize| masks.inter.is_none_or(|m| m.get(i, j));
            let kept_intra = |j: usize| masks.intra.is_none_or(|m| m.get(i, j));

            let pos = inter_row[i] / tau;
            let mut max = pos;
            for j in 0..n {
                if j != i && kept_inter(j) {
                    max = max.max(inter_row[j] / tau);
                }
                if use_intra && j != i && kept_intra(j) {
                    max = max.max(intra_row[j] / tau);
                }
            }
            let mut denom = (pos - max).exp();
            for j in 0..n {
                if j != i && kept_inter(j) {
                    denom += (inter_row[j] / tau - max).exp();
                }
                if use_intra && j != i && kept_intra(j) {
                    denom += (intra_row[j] / tau - max).exp();
                }
            }
            let lse = max + denom.ln();
            let loss = lse - pos;

            // Overwrite similarities with ∂L/∂θ coefficients.
            for j in 0..n {
                let c_inter = if j == i {
                    ((pos - lse).exp() - 1.0) * scale
                } else if kept_inter(j) {
                    (inter_row[j] / tau - lse).exp() * scale
                } else {
                    0.0
                };
                let c_intra = if use_intra && j != i && kept_intra(j) {
                    (intra_row[j] / tau - lse).exp() * scale
                } else {
                    0.0
                };
                inter_row[j] = c_inter;
                intra_row[j] = c_intra;
            }
            loss
        })
        .collect();
    losses.iter().sum()
}

/// Computes the contrastive loss and its gradients.
///
/// `filter`, when present, must have been sampled for these `N` nodes; a
/// filter that keeps everything reproduces the unfiltered result exactly
/// (identical code path). With `NegativePool::InterOnly` the intra-view
/// candidates are excluded regardless of the filter. The loss is
/// nonnegative up to round-off.
pub fn info_nce(
    z1: &DenseMatrix,
    z2: &DenseMatrix,
    filter: Option<&NegativeFilter>,
    tau: f64,
    pool: NegativePool,
) -> Result<InfoNceResult> {
    if z1.rows() != z2.rows() || z1.cols() != z2.cols() {
        return Err(Error::invalid(format!(
            "view embeddings disagree: {}x{} vs {}x{}",
            z1.rows(),
            z1.cols(),
            z2.rows(),
            z2.cols()
        )));
    }
    let n = z1.rows();
    if n == 0 {
        return Err(Error::invalid("cannot contrast zero nodes"));
    }
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {tau}"
        )));
    }
    if let Some(f) = filter {
        if f.num_nodes() != n {
            return Err(Error::invalid(format!(
                "filter covers {} nodes but embeddings have {n}",
                f.num_nodes()
            )));
        }
    }

    let use_intra = pool == NegativePool::InterAndIntra;
    let scale = 1.0 / (2.0 * n as f64 * tau);

    let mut c12 = z1.matmul_transpose_b(z2)?;
    let mut c11 = z1.matmul_transpose_b(z1)?;
    let mut c21 = c12.transpose();
    let mut c22 = z2.matmul_transpose_b(z2)?;

    let loss1 = direction_pass(
        &mut c12,
        &mut c11,
        &DirectionMasks {
            inter: filter.map(|f| &f.keep_12),
            intra: filter.map(|f| &f.keep_11),
        },
        use_intra,
        tau,
        scale,
    );
    let loss2 = direction_pass(
        &mut c21,
        &mut c22,
        &DirectionMasks {
            inter: filter.map(|f| &f.keep_21),
            intra: filter.map(|f| &f.keep_22),
        },
        use_intra,
        tau,
        scale,
    );
    let loss = (loss1 + loss2) / (2.0 * n as f64);

    // dZ1 = C12 Z2 + (C11 + C11ᵀ) Z1 + C21ᵀ Z2, and symmetrically for dZ2.
    let mut c11_sym = c11.transpose();
    c11_sym.add_assign(&c11)?;
    let mut c22_sym = c22.transpose();
    c22_sym.add_assign(&c22)?;

    let mut grad_z1 = c12.matmul(z2)?;
    grad_z1.add_assign(&c11_sym.matmul(z1)?)?;
    grad_z1.add_assign(&c21.transpose_matmul(z2)?)?;

    let mut grad_z2 = c21.matmul(z1)?;
    grad_z2.add_assign(&c22_sym.matmul(z2)?)?;
    grad_z2.add_assign(&c12.transpose_matmul(z1)?)?;

    Ok(InfoNceResult {
        loss,
        grad_z1,
        grad_z2,
    })
}

/// How well the first-order expansion `N_f + (1/τ)ΣΔ_j` tracks the exact
/// per-anchor sum `Σ exp(Δ_j/τ)` over the kept negatives, where
/// `Δ_j = θ(anchor, negative_j) − θ(anchor, positive)`.
#[derive(Clone, Debug)]
pub struct TaylorReport {
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Largest `|Δ_j|/τ` encountered; the expansion is only meaningful when
    /// this is small.
    pub max_spread: f64,
    pub anchors_checked: usize,
}

/// Evaluates the first-order expansion anchor by anchor (both directions).
/// Anchors whose filtered pool is empty are skipped.
pub fn taylor_diagnostic(
    z1: &DenseMatrix,
    z2: &DenseMatrix,
    filter: Option<&NegativeFilter>,
    tau: f64,
    pool: NegativePool,
) -> Result<TaylorReport> {
    if z1.rows() != z2.rows() || z1.cols() != z2.cols() {
        return Err(Error::invalid("view embeddings must share a shape"));
    }
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::invalid("temperature must be positive and finite"));
    }
    let n = z1.rows();
    let use_intra = pool == NegativePool::InterAndIntra;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut report = TaylorReport {
        max_rel_error: 0.0,
        mean_rel_error: 0.0,
        max_spread: 0.0,
        anchors_checked: 0,
    };
    let mut total_rel = 0.0;

    for dir in 0..2 {
        let (za, zb) = if dir == 0 { (z1, z2) } else { (z2, z1) };
        let (inter_mask, intra_mask) = match filter {
            Some(f) if dir == 0 => (Some(&f.keep_12), Some(&f.keep_11)),
            Some(f) => (Some(&f.keep_21), Some(&f.keep_22)),
            None => (None, None),
        };
        for i in 0..n {
            let anchor = za.row(i);
            let pos = dot(anchor, zb.row(i));
            let mut count = 0usize;
            let mut sum_delta = 0.0;
            let mut exact = 0.0;
            let mut spread: f64 = 0.0;
            let mut add = |theta: f64| {
                let delta = theta - pos;
                count += 1;
                sum_delta += delta;
                exact += (delta / tau).exp();
                spread = spread.max((delta / tau).abs());
            };
            for j in 0..n {
                if j != i && inter_mask.is_none_or(|m| m.get(i, j)) {
                    add(dot(anchor, zb.row(j)));
                }
                if use_intra && j != i && intra_mask.is_none_or(|m| m.get(i, j)) {
                    add(dot(anchor, za.row(j)));
                }
            }
            if count == 0 {
                continue;
            }
            let approx = count as f64 + sum_delta / tau;
            let rel = (approx - exact).abs() / exact;
            report.max_rel_error = report.max_rel_error.max(rel);
            report.max_spread = report.max_spread.max(spread);
            total_rel += rel;
            report.anchors_checked += 1;
        }
    }
    if report.anchors_checked > 0 {
        report.mean_rel_error = total_rel / report.anchors_checked as f64;
    }
    Ok(report)
}
