//! Two-layer graph convolutional encoder with hand-derived gradients.
//!
//! Forward pass: `Z = rownorm(Â · σ(Â · X · W₁) · W₂)` where `Â` is the
//! symmetrically normalized adjacency with self-loops, `σ` is ReLU (an
//! identity activation exists as a test hook), and `rownorm` projects each
//! output row onto the unit sphere so the contrastive objective can use
//! plain dot products as cosine similarities.
//!
//! The backward pass mirrors the forward chain exactly; both views of the
//! contrastive pair share `W₁`/`W₂`, so callers sum the two gradient
//! contributions before an optimizer step.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::{CsrMatrix, DenseMatrix, Rng};

/// Nonlinearity after the first layer. `Identity` turns the encoder into a
/// linear map, which makes several exact tests possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Activation> {
        match name {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation '{other}'"))),
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative at a pre-activation value; ReLU uses subgradient 0 at 0.
    fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Shared encoder weights.
#[derive(Clone, Debug)]
pub struct EncoderParams {
    pub w1: DenseMatrix,
    pub w2: DenseMatrix,
    pub activation: Activation,
}

impl EncoderParams {
    /// Glorot-uniform initialization: entries drawn from
    /// `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`, `W₁` first
    /// (row-major order), then `W₂`.
    pub fn init(
        in_dim: usize,
        hidden_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut Rng,
    ) -> Result<EncoderParams> {
        for (name, d) in [
            ("input", in_dim),
            ("hidden", hidden_dim),
            ("output", out_dim),
        ] {
            if d == 0 {
                return Err(Error::invalid(format!("{name} dimension must be nonzero")));
            }
        }
        let glorot = |rows: usize, cols: usize, rng: &mut Rng| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform_in(-a, a))
        };
        Ok(EncoderParams {
            w1: glorot(in_dim, hidden_dim, rng),
            w2: glorot(hidden_dim, out_dim, rng),
            activation,
        })
    }

    /// (input, hidden, output) dimensions.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.w1.rows(), self.w1.cols(), self.w2.cols())
    }
}

/// Symmetrically normalized adjacency with self-loops, `Â = D̃^{-1/2}(A +
/// I)D̃^{-1/2}` with `d̃_u = deg(u) + 1`, stored sparse. `Â` is symmetric,
/// so it serves as its own transpose in the backward pass.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    csr: CsrMatrix,
}

impl NormalizedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.csr.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.csr
    }

    fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.csr.matmul_dense(m)
    }
}

/// Builds `Â` for `g`, using edge weights when present. Every diagonal
/// entry is positive, so even isolated nodes propagate their own features.
pub fn normalize_adjacency(g: &Graph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = g
        .weighted_degrees()
        .iter()
        .map(|&d| 1.0 / (d + 1.0).sqrt())
        .collect();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for u in 0..n {
        let neighbors = g.neighbors(u);
        let weights = g.neighbor_weights(u);
        let mut self_loop_written = false;
        for (pos, &v) in neighbors.iter().enumerate() {
            if !self_loop_written && v > u {
                col_idx.push(u);
                values.push(inv_sqrt[u] * inv_sqrt[u]);
                self_loop_written = true;
            }
            let w = weights.map_or(1.0, |ws| ws[pos]);
            col_idx.push(v);
            values.push(w * inv_sqrt[u] * inv_sqrt[v]);
        }
        if !self_loop_written {
            col_idx.push(u);
            values.push(inv_sqrt[u] * inv_sqrt[u]);
        }
        row_ptr.push(col_idx.len());
    }
    NormalizedAdjacency {
        csr: CsrMatrix::new(n, n, row_ptr, col_idx, values)
            .expect("normalized adjacency construction is structurally sound"),
    }
}

/// Intermediates captured by [`forward`] and consumed by [`backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// First-layer pre-activation `Â X W₁`.
    s1: DenseMatrix,
    /// First-layer activation `σ(S₁)`.
    h: DenseMatrix,
    /// Normalized output rows.
    z: DenseMatrix,
    /// Row norms of the pre-normalization output (0 for zero rows, which
    /// stay zero in `z`).
    norms: Vec<f64>,
}

/// Runs the encoder. Returns the row-normalized embedding matrix and the
/// cache needed for the backward pass.
pub fn forward(
    params: &EncoderParams,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
) -> Result<(DenseMatrix, ForwardCache)> {
    if x.rows() != adj.num_nodes() {
        return Err(Error::invalid(format!(
            "feature matrix has {} rows but the adjacency covers {} nodes",
            x.rows(),
            adj.num_nodes()
        )));
    }
    if x.cols() != params.w1.rows() {
        return Err(Error::invalid(format!(
            "feature dimension {} does not match W1 input dimension {}",
            x.cols(),
            params.w1.rows()
        )));
    }
    let t1 = x.matmul(&params.w1)?;
    let s1 = adj.apply(&t1)?;
    let h = s1.map(|v| params.activation.apply(v));
    let t2 = h.matmul(&params.w2)?;
    let y = adj.apply(&t2)?;
    let (z, norms) = y.row_l2_normalized();
    Ok((z.clone(), ForwardCache { s1, h, z, norms }))
}

/// Gradients with respect to the encoder weights.
#[derive(Clone, Debug)]
pub struct EncoderGrads {
    pub w1: DenseMatrix,
    pub w2: DenseMatrix,
}

impl EncoderGrads {
    pub fn zeros_like(params: &EncoderParams) -> EncoderGrads {
        EncoderGrads {
            w1: DenseMatrix::zeros(params.w1.rows(), params.w1.cols()),
            w2: DenseMatrix::zeros(params.w2.rows(), params.w2.cols()),
        }
    }

    /// Accumulates another gradient contribution (shared weights across
    /// views sum their gradients).
    pub fn accumulate(&mut self, other: &EncoderGrads) -> Result<()> {
        self.w1.add_assign(&other.w1)?;
        self.w2.add_assign(&other.w2)
    }
}

/// Backpropagates `grad_z` (∂L/∂Z) through the encoder.
///
/// The row-normalization Jacobian maps an upstream row `g` to
/// `(g - (g·z) z) / ‖y‖`; rows that were zero before normalization get a
/// zero gradient. `Â` is symmetric, so its transpose never materializes.
pub fn backward(
    params: &EncoderParams,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    cache: &ForwardCache,
    grad_z: &DenseMatrix,
) -> Result<EncoderGrads> {
    let n = adj.num_nodes();
    if grad_z.rows() != n || grad_z.cols() != params.w2.cols() {
        return Err(Error::invalid(format!(
            "upstream gradient is {}x{}, expected {}x{}",
            grad_z.rows(),
            grad_z.cols(),
            n,
            params.w2.cols()
        )));
    }
    if x.rows() != n || x.cols() != params.w1.rows() || cache.h.rows() != n {
        return Err(Error::invalid(
            "features or cache do not match the adjacency and parameters",
        ));
    }

    let mut d_y = DenseMatrix::zeros(n, grad_z.cols());
    for i in 0..n {
        let norm = cache.norms[i];
        if norm == 0.0 {
            continue;
        }
        let g = grad_z.row(i);
        let z = cache.z.row(i);
        let dot: f64 = g.iter().zip(z).map(|(a, b)| a * b).sum();
        let out = d_y.row_mut(i);
        for (t, (&gv, &zv)) in g.iter().zip(z).enumerate() {
            out[t] = (gv - dot * zv) / norm;
        }
    }

    let d_t2 = adj.apply(&d_y)?;
    let d_w2 = cache.h.transpose_matmul(&d_t2)?;
    let d_h = d_t2.matmul_transpose_b(&params.w2)?;
    let mut d_s1 = d_h;
    for (dv, sv) in d_s1.data_mut().iter_mut().zip(cache.s1.data()) {
        *dv *= params.activation.derivative(*sv);
    }
    let d_t1 = adj.apply(&d_s1)?;
    let d_w1 = x.transpose_matmul(&d_t1)?;
    Ok(EncoderGrads { w1: d_w1, w2: d_w2 })
}
