//! Shared fixtures for the benchmark targets.

use topogcl_core::graph::{generate_sbm, SbmConfig};
use topogcl_core::numerics::DenseMatrix;
use topogcl_core::{Graph, Rng};

/// Deterministic dense matrix with standard-normal entries.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = Rng::seed_from(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Random symmetric matrix, for eigensolver benchmarks.
pub fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let a = random_matrix(n, n, seed);
    DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
}

/// Row-normalized embeddings, as the loss consumes them.
pub fn unit_rows(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    random_matrix(rows, cols, seed).row_l2_normalized().0
}

/// Two-block benchmark graph sized for single-core iteration.
pub fn bench_graph(num_nodes: usize, seed: u64) -> Graph {
    generate_sbm(&SbmConfig {
        num_nodes,
        num_blocks: 2,
        p_intra: 0.2,
        p_inter: 0.02,
        feature_dim: 32,
        feature_noise: 0.5,
        seed,
    })
    .expect("valid SBM config")
}
