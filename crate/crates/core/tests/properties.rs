//! Property-based invariants over randomly generated inputs. These
//! complement the example-based unit tests: instead of pinning specific
//! values they state laws that must hold for *every* input the generators
//! can produce — symmetry, conservation, bounds, determinism, and
//! round-trip identities.

use proptest::prelude::*;

use topogcl_core::contrast::prototype::kmeans;
use topogcl_core::contrast::{info_nce, NegativePool};
use topogcl_core::eval::{make_split, nmi, NmiNorm};
use topogcl_core::graph::{generate_sbm, SbmConfig};
use topogcl_core::numerics::adam::AdamState;
use topogcl_core::numerics::eigen::{sym_eig, DEFAULT_EIG_TOL};
use topogcl_core::perturb::{adaptive_weights, perturb, PerturbConfig};
use topogcl_core::tgm::{read_matrix, write_matrix, DType};
use topogcl_core::topo::{normalized_laplacian, topk_graph};
use topogcl_core::{DenseMatrix, Graph, Rng};

/// A node count together with a same-range edge list; self-loops and
/// duplicates are intentionally allowed so construction cleanup is covered.
fn graph_parts() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..10usize).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), 1..25),
        )
    })
}

fn build_graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    let features = DenseMatrix::from_fn(n, 3, |i, j| ((i * 3 + j) % 7) as f64 - 3.0);
    Graph::new(features, None, edges).unwrap()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-5.0..5.0f64, rows * cols)
        .prop_map(move |data| DenseMatrix::from_fn(rows, cols, |i, j| data[i * cols + j]))
}

fn unit_rows(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    matrix(rows, cols).prop_map(|m| {
        let (normalized, norms) = m.row_l2_normalized();
        // Rows that normalized to zero get a deterministic fallback so the
        // result is always a valid embedding matrix.
        DenseMatrix::from_fn(normalized.rows(), normalized.cols(), |i, j| {
            if norms[i] == 0.0 {
                if j == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                normalized.get(i, j)
            }
        })
    })
}

proptest! {
    #[test]
    fn graph_construction_is_clean_and_symmetric((n, edges) in graph_parts()) {
        let g = build_graph(n, &edges);
        let listed = g.edge_list();
        // Canonical order, no self-loops, no duplicates.
        for window in listed.windows(2) {
            prop_assert!(window[0] < window[1]);
        }
        for &(u, v) in &listed {
            prop_assert!(u < v);
            prop_assert!(g.has_edge(u, v) && g.has_edge(v, u));
        }
        // Adjacency is symmetric and degree mass is conserved.
        let total: usize = (0..n).map(|u| g.neighbors(u).len()).sum();
        prop_assert_eq!(total, 2 * g.num_edges());
    }

    #[test]
    fn laplacian_is_symmetric_with_spectrum_in_0_2((n, edges) in graph_parts()) {
        let g = build_graph(n, &edges);
        let lap = normalized_laplacian(&g);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(lap.get(i, j), lap.get(j, i));
            }
        }
        let dec = sym_eig(&lap, DEFAULT_EIG_TOL).unwrap();
        for &l in &dec.eigenvalues {
            prop_assert!((-1e-9..=2.0 + 1e-9).contains(&l), "eigenvalue {l} escapes [0, 2]");
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_eigenvalues_sorted(m in matrix(6, 6)) {
        let sym = DenseMatrix::from_fn(6, 6, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)));
        let dec = sym_eig(&sym, DEFAULT_EIG_TOL).unwrap();
        let u = &dec.eigenvectors;
        let gram = u.transpose().matmul(u).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram.get(i, j) - want).abs() < 1e-9);
            }
        }
        for pair in dec.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn row_normalization_reconstructs_the_input(m in matrix(5, 4)) {
        let (normalized, norms) = m.row_l2_normalized();
        for (i, &nrm) in norms.iter().enumerate() {
            let row_norm: f64 = normalized.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 {
                prop_assert!(normalized.row(i).iter().all(|&v| v == 0.0));
            } else {
                prop_assert!((row_norm - 1.0).abs() < 1e-12);
            }
            for j in 0..4 {
                prop_assert!((normalized.get(i, j) * nrm - m.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn info_nce_is_nonnegative_and_permutation_invariant(
        z1 in unit_rows(6, 4),
        z2 in unit_rows(6, 4),
        rot in 1..5usize,
    ) {
        let loss = info_nce(&z1, &z2, None, 0.5, NegativePool::InterAndIntra)
            .unwrap()
            .loss;
        // The positive term appears in its own denominator, so every
        // per-anchor contribution is a -log of a value in (0, 1].
        prop_assert!(loss >= 0.0);

        // Relabeling the nodes (same permutation on both views) only
        // reorders the per-anchor sums.
        let perm: Vec<usize> = (0..6).map(|i| (i + rot) % 6).collect();
        let p1 = DenseMatrix::from_fn(6, 4, |i, j| z1.get(perm[i], j));
        let p2 = DenseMatrix::from_fn(6, 4, |i, j| z2.get(perm[i], j));
        let permuted = info_nce(&p1, &p2, None, 0.5, NegativePool::InterAndIntra)
            .unwrap()
            .loss;
        prop_assert!((loss - permuted).abs() < 1e-9);
    }

    #[test]
    fn perturbation_only_removes((n, edges) in graph_parts(), seed in any::<u64>()) {
        let g = build_graph(n, &edges);
        let weights = adaptive_weights(&g, &PerturbConfig::default()).unwrap();
        let view = perturb(&g, &weights, &mut Rng::seed_from(seed)).unwrap();

        prop_assert_eq!(view.num_nodes(), g.num_nodes());
        // Edges are a subset of the originals; nothing is invented.
        for &(u, v) in &view.edge_list() {
            prop_assert!(g.has_edge(u, v));
        }
        // Feature columns are either untouched or zeroed for every node.
        for t in 0..g.feature_dim() {
            let zeroed = (0..n).all(|u| view.features().get(u, t) == 0.0);
            let kept = (0..n).all(|u| view.features().get(u, t) == g.features().get(u, t));
            prop_assert!(zeroed || kept, "column {t} was partially masked");
        }
    }

    #[test]
    fn removal_probabilities_are_bounded_and_antimonotone((n, edges) in graph_parts()) {
        let g = build_graph(n, &edges);
        let cfg = PerturbConfig::default();
        let weights = adaptive_weights(&g, &cfg).unwrap();
        let deg = {
            let mut d = vec![0usize; n];
            for &(u, v) in &g.edge_list() {
                d[u] += 1;
                d[v] += 1;
            }
            d
        };
        let strengths: Vec<f64> = g
            .edge_list()
            .iter()
            .map(|&(u, v)| (1.0 + deg[u].min(deg[v]) as f64).ln())
            .collect();
        for (i, &p) in weights.edge_probs.iter().enumerate() {
            prop_assert!((0.0..=cfg.p_tau).contains(&p));
            for (j, &q) in weights.edge_probs.iter().enumerate() {
                if strengths[i] < strengths[j] {
                    // Weaker edges are never less likely to be dropped.
                    prop_assert!(p >= q - 1e-12);
                }
            }
        }
    }

    #[test]
    fn topk_keeps_at_most_k_picks_per_node(
        cands in matrix(7, 7),
        k in 1..4usize,
    ) {
        let base = build_graph(7, &[(0, 1)]);
        let scores = cands.map(f64::abs);
        let g = topk_graph(&scores, k, &base).unwrap();
        prop_assert!(g.num_edges() <= 7 * k);
        for &(u, v) in &g.edge_list() {
            prop_assert!(g.has_edge(v, u));
            // The edge must have been *some* endpoint's positive pick.
            prop_assert!(scores.get(u, v) > 0.0 || scores.get(v, u) > 0.0);
        }
    }

    #[test]
    fn kmeans_partitions_points_with_monotone_inertia(
        points in matrix(12, 3),
        k in 1..5usize,
        seed in any::<u64>(),
    ) {
        let model = kmeans(&points, k, 20, &mut Rng::seed_from(seed)).unwrap();
        prop_assert_eq!(model.assignments.len(), 12);
        prop_assert!(model.assignments.iter().all(|&c| c < k));
        prop_assert_eq!(model.counts.iter().sum::<usize>(), 12);
        for pair in model.inertia_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9);
        }
        prop_assert_eq!(model.inertia, *model.inertia_trace.last().unwrap());
    }

    #[test]
    fn split_is_a_stratified_partition(
        class_sizes in prop::collection::vec(3..10usize, 2..5),
        seed in any::<u64>(),
    ) {
        let labels: Vec<usize> = class_sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &sz)| std::iter::repeat_n(c, sz))
            .collect();
        let split = make_split(&labels, (0.2, 0.2), seed).unwrap();
        let mut seen = vec![0u8; labels.len()];
        for (bucket, ids) in [(0, &split.train), (1, &split.val), (2, &split.test)] {
            for &i in ids {
                prop_assert!(i < labels.len());
                prop_assert_eq!(seen[i], 0, "index {} appears in two buckets", i);
                seen[i] = bucket + 1;
            }
        }
        prop_assert!(seen.iter().all(|&b| b != 0), "some index was dropped");
        // Stratification: every class appears in every bucket.
        for c in 0..class_sizes.len() {
            for ids in [&split.train, &split.val, &split.test] {
                prop_assert!(ids.iter().any(|&i| labels[i] == c));
            }
        }
    }

    #[test]
    fn nmi_is_symmetric_bounded_and_reflexive(
        labels in prop::collection::vec(0..4usize, 4..30),
        preds_seed in any::<u64>(),
    ) {
        let mut preds = labels.clone();
        Rng::seed_from(preds_seed).shuffle(&mut preds);
        for norm in [NmiNorm::Geometric, NmiNorm::Arithmetic] {
            let ab = nmi(&labels, &preds, norm).unwrap();
            let ba = nmi(&preds, &labels, norm).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((nmi(&labels, &labels, norm).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sbm_generation_is_deterministic(
        blocks in 2..4usize,
        nodes_per_block in 3..8usize,
        seed in any::<u64>(),
    ) {
        let cfg = SbmConfig {
            num_nodes: blocks * nodes_per_block,
            num_blocks: blocks,
            p_intra: 0.6,
            p_inter: 0.1,
            feature_dim: blocks + 2,
            feature_noise: 0.3,
            seed,
        };
        let a = generate_sbm(&cfg).unwrap();
        let b = generate_sbm(&cfg).unwrap();
        prop_assert_eq!(a.edge_list(), b.edge_list());
        prop_assert_eq!(a.features().data(), b.features().data());
        prop_assert_eq!(a.labels(), b.labels());
        // Labels follow the round-robin block layout.
        let labels = a.labels().unwrap();
        for (i, &l) in labels.iter().enumerate() {
            prop_assert_eq!(l, i % blocks);
        }
    }

    #[test]
    fn tgm_round_trips(m in matrix(4, 6)) {
        let dir = tempfile::tempdir().unwrap();
        let f64_path = dir.path().join("m64.tgm");
        write_matrix(&f64_path, &m, DType::F64).unwrap();
        let back = read_matrix(&f64_path).unwrap();
        prop_assert_eq!(back.data(), m.data());

        let f32_path = dir.path().join("m32.tgm");
        write_matrix(&f32_path, &m, DType::F32).unwrap();
        let back32 = read_matrix(&f32_path).unwrap();
        for (a, b) in back32.data().iter().zip(m.data()) {
            prop_assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn adam_ignores_zero_gradients_and_counts_steps(
        w in matrix(3, 3),
        steps in 1..5u64,
    ) {
        let mut p = w.clone();
        let zero = DenseMatrix::zeros(3, 3);
        let mut adam = AdamState::new(&[&p]);
        for _ in 0..steps {
            let moved = adam.step(&mut [&mut p], &[&zero], 0.05).unwrap();
            prop_assert_eq!(moved, 0.0);
        }
        prop_assert_eq!(p.data(), w.data());
        prop_assert_eq!(adam.step_count(), steps);
    }
}
