//! Attributed undirected graphs: construction, file formats, degree
//! statistics, content hashing, and a stochastic block model generator for
//! synthetic benchmarks.
//!
//! Adjacency is stored in compressed sparse row form with both directions of
//! every undirected edge materialized and neighbor lists sorted. Self-loops
//! are dropped at construction (the encoder adds its own), duplicate edges
//! are collapsed, and node features are shared behind an `Arc` so augmented
//! views can reuse them without copying.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::rng::{stream, Rng};
use crate::numerics::{CsrMatrix, DenseMatrix};
use crate::tgm;

/// Undirected attributed graph.
#[derive(Clone, Debug)]
pub struct Graph {
    num_nodes: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Edge weights aligned with `col_idx`; `None` means every edge has
    /// weight 1. Weights are nonnegative and symmetric.
    weights: Option<Vec<f64>>,
    features: Arc<DenseMatrix>,
    labels: Option<Vec<usize>>,
}

/// What construction had to clean up; callers surface these as warnings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

/// Per-node degrees with summary statistics.
#[derive(Clone, Debug)]
pub struct DegreeInfo {
    pub per_node: Vec<usize>,
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl Graph {
    /// Builds a graph from an unweighted edge list. Order and direction of
    /// the input pairs are irrelevant; self-loops are dropped and duplicates
    /// merged.
    pub fn new(
        features: DenseMatrix,
        labels: Option<Vec<usize>>,
        edges: &[(usize, usize)],
    ) -> Result<Graph> {
        let weighted: Vec<(usize, usize, f64)> =
            edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Ok(Graph::build(features, labels, &weighted, false)?.0)
    }

    /// Builds an edge-weighted graph. Weights must be finite and
    /// nonnegative; when duplicate edges appear, the first weight wins.
    pub fn new_weighted(
        features: DenseMatrix,
        labels: Option<Vec<usize>>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Graph> {
        Ok(Graph::build(features, labels, edges, true)?.0)
    }

    /// Full constructor returning cleanup statistics.
    pub fn build(
        features: DenseMatrix,
        labels: Option<Vec<usize>>,
        edges: &[(usize, usize, f64)],
        keep_weights: bool,
    ) -> Result<(Graph, BuildStats)> {
        let n = features.rows();
        if !features.is_finite() {
            return Err(Error::malformed("feature matrix has non-finite entries"));
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(Error::malformed(format!(
                    "label vector length {} does not match {} nodes",
                    l.len(),
                    n
                )));
            }
        }

        let mut stats = BuildStats::default();
        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            if u == v {
                stats.self_loops_dropped += 1;
                continue;
            }
            pairs.push((u.min(v), u.max(v), w));
        }
        pairs.sort_by_key(|e| (e.0, e.1));
        let before = pairs.len();
        pairs.dedup_by_key(|e| (e.0, e.1));
        stats.duplicates_merged = before - pairs.len();

        let mut degree = vec![0usize; n];
        for &(u, v, _) in &pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut w_idx = vec![0f64; nnz];
        let mut cursor = row_ptr.clone();
        for &(u, v, w) in &pairs {
            col_idx[cursor[u]] = v;
            w_idx[cursor[u]] = w;
            cursor[u] += 1;
            col_idx[cursor[v]] = u;
            w_idx[cursor[v]] = w;
            cursor[v] += 1;
        }
        // Neighbor lists are sorted because `pairs` was sorted by (min, max)
        // and insertion preserves that order per row for the `u` side; the
        // `v` side receives strictly increasing `u` values too.
        Ok((
            Graph {
                num_nodes: n,
                row_ptr,
                col_idx,
                weights: keep_weights.then_some(w_idx),
                features: Arc::new(features),
                labels,
            },
            stats,
        ))
    }

    /// Rewires this graph's topology while sharing its features and labels
    /// (the feature matrix is reference-counted, not copied).
    pub fn with_edges(&self, edges: &[(usize, usize)]) -> Result<Graph> {
        let weighted: Vec<(usize, usize, f64)> =
            edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        let mut g = Graph::build(
            DenseMatrix::zeros(self.num_nodes, 0),
            None,
            &weighted,
            false,
        )?
        .0;
        g.features = Arc::clone(&self.features);
        g.labels = self.labels.clone();
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Count of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_idx.len() / 2
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn features_arc(&self) -> &Arc<DenseMatrix> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of classes, `max(label) + 1`.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |&m| m + 1))
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    /// Weights aligned with `neighbors(u)`, or `None` when all edges weigh 1.
    pub fn neighbor_weights(&self, u: usize) -> Option<&[f64]> {
        self.weights
            .as_ref()
            .map(|w| &w[self.row_ptr[u]..self.row_ptr[u + 1]])
    }

    /// True when the graph carries explicit edge weights.
    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Canonical undirected edge list: pairs `(u, v)` with `u < v` in
    /// lexicographic order. Random draws indexed "per edge" follow this
    /// order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes {
            for &v in self.neighbors(u) {
                if v > u {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    /// Weight of the edge at position `i` of [`Graph::edge_list`].
    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let pos = self.neighbors(u).binary_search(&v).ok()?;
        Some(match &self.weights {
            Some(w) => w[self.row_ptr[u] + pos],
            None => 1.0,
        })
    }

    pub fn degrees(&self) -> DegreeInfo {
        let per_node: Vec<usize> = (0..self.num_nodes)
            .map(|u| self.row_ptr[u + 1] - self.row_ptr[u])
            .collect();
        let min = per_node.iter().copied().min().unwrap_or(0);
        let max = per_node.iter().copied().max().unwrap_or(0);
        let mean = if self.num_nodes == 0 {
            0.0
        } else {
            per_node.iter().sum::<usize>() as f64 / self.num_nodes as f64
        };
        DegreeInfo {
            per_node,
            min,
            max,
            mean,
        }
    }

    /// Weighted degree of every node (equals structural degree when the
    /// graph is unweighted).
    pub fn weighted_degrees(&self) -> Vec<f64> {
        (0..self.num_nodes)
            .map(|u| match self.neighbor_weights(u) {
                Some(w) => w.iter().sum(),
                None => self.neighbors(u).len() as f64,
            })
            .collect()
    }

    /// Adjacency as a general sparse matrix (weight 1 when unweighted).
    pub fn adjacency(&self) -> CsrMatrix {
        let values = match &self.weights {
            Some(w) => w.clone(),
            None => vec![1.0; self.col_idx.len()],
        };
        CsrMatrix::new(
            self.num_nodes,
            self.num_nodes,
            self.row_ptr.clone(),
            self.col_idx.clone(),
            values,
        )
        .expect("internal adjacency is structurally valid")
    }

    /// Content-addressed identity of the graph: SHA-256 over node count,
    /// edges (with weights), feature bits, and labels. Two graphs hash equal
    /// iff they are bit-identical, which keys cached derived artifacts.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"topogcl-graph-v1");
        h.update((self.num_nodes as u64).to_le_bytes());
        h.update((self.features.cols() as u64).to_le_bytes());
        for (u, v) in self.edge_list() {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
            let w = self.edge_weight(u, v).unwrap_or(1.0);
            h.update(w.to_bits().to_le_bytes());
        }
        for &x in self.features.data() {
            h.update(x.to_bits().to_le_bytes());
        }
        match &self.labels {
            Some(l) => {
                h.update([1u8]);
                for &y in l {
                    h.update((y as u64).to_le_bytes());
                }
            }
            None => h.update([0u8]),
        }
        let mut out = String::with_capacity(64);
        for byte in h.finalize() {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

/// Reads a graph from disk.
///
/// * `edges`: text file, one `u v` pair per line, `#` comments and blank
///   lines allowed.
/// * `features`: `.csv` for comma-separated numeric text (N rows, d
///   columns), anything else is read as a TGM1 binary matrix.
/// * `labels`: optional text file, one integer in `[0, C)` per line.
pub fn load_graph(
    edges_path: &Path,
    features_path: &Path,
    labels_path: Option<&Path>,
) -> Result<(Graph, BuildStats)> {
    let features = if features_path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        read_features_csv(features_path)?
    } else {
        tgm::read_matrix(features_path)?
    };
    let n = features.rows();

    let labels = match labels_path {
        Some(p) => Some(read_labels(p, n)?),
        None => None,
    };

    let edges = read_edge_list(edges_path, n)?;
    let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    Graph::build(features, labels, &weighted, false)
}

/// Writes a graph back to disk in the formats [`load_graph`] reads. The
/// round trip is bit-exact for features (CSV uses shortest round-trip float
/// formatting; TGM stores raw bits). Weighted graphs are not supported by
/// the text edge format.
pub fn save_graph(
    g: &Graph,
    edges_path: &Path,
    features_path: &Path,
    labels_path: Option<&Path>,
) -> Result<()> {
    if g.weights.is_some() {
        return Err(Error::invalid(
            "the text edge format cannot represent edge weights",
        ));
    }
    let mut ef = BufWriter::new(File::create(edges_path)?);
    for (u, v) in g.edge_list() {
        writeln!(ef, "{u} {v}")?;
    }
    ef.flush()?;

    if features_path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let mut ff = BufWriter::new(File::create(features_path)?);
        for r in 0..g.features.rows() {
            let row = g.features.row(r);
            let line = row
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(ff, "{line}")?;
        }
        ff.flush()?;
    } else {
        tgm::write_matrix(features_path, &g.features, tgm::DType::F64)?;
    }

    if let Some(p) = labels_path {
        let labels = g
            .labels()
            .ok_or_else(|| Error::invalid("graph has no labels to save"))?;
        let mut lf = BufWriter::new(File::create(p)?);
        for &y in labels {
            writeln!(lf, "{y}")?;
        }
        lf.flush()?;
    }
    Ok(())
}

fn read_edge_list(path: &Path, n: usize) -> Result<Vec<(usize, usize)>> {
    let file = File::open(path)?;
    let mut edges = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::malformed(format!(
                    "{}:{}: expected exactly two node ids",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        let parse = |tok: &str| -> Result<usize> {
            tok.parse::<usize>().map_err(|_| {
                Error::malformed(format!(
                    "{}:{}: '{tok}' is not a node id",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u >= n || v >= n {
            return Err(Error::IndexOutOfRange(format!(
                "{}:{}: edge ({u}, {v}) exceeds node count {n}",
                path.display(),
                lineno + 1
            )));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn read_features_csv(path: &Path) -> Result<DenseMatrix> {
    let file = File::open(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = trimmed
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let v: f64 = tok.parse().map_err(|_| {
                    Error::malformed(format!(
                        "{}:{}: '{tok}' is not a number",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::malformed(format!(
                        "{}:{}: non-finite feature value",
                        path.display(),
                        lineno + 1
                    )));
                }
                Ok(v)
            })
            .collect();
        let row = row?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::malformed(format!(
                    "{}:{}: row has {} columns, expected {w}",
                    path.display(),
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}

/// Reads a label file (one nonnegative integer per line, blank lines
/// skipped) and checks the count against `expected`.
pub fn load_labels(path: &Path, expected: usize) -> Result<Vec<usize>> {
    read_labels(path, expected)
}

fn read_labels(path: &Path, n: usize) -> Result<Vec<usize>> {
    let file = File::open(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let y: i64 = trimmed.parse().map_err(|_| {
            Error::malformed(format!(
                "{}:{}: '{trimmed}' is not an integer label",
                path.display(),
                lineno + 1
            ))
        })?;
        if y < 0 {
            return Err(Error::malformed(format!(
                "{}:{}: labels must be nonnegative",
                path.display(),
                lineno + 1
            )));
        }
        labels.push(y as usize);
    }
    if labels.len() != n {
        return Err(Error::malformed(format!(
            "{}: {} labels for {} nodes",
            path.display(),
            labels.len(),
            n
        )));
    }
    Ok(labels)
}

/// Configuration for [`generate_sbm`].
#[derive(Clone, Debug)]
pub struct SbmConfig {
    pub num_nodes: usize,
    pub num_blocks: usize,
    /// Edge probability within a block.
    pub p_intra: f64,
    /// Edge probability across blocks.
    pub p_inter: f64,
    /// Feature dimension; must be at least `num_blocks`.
    pub feature_dim: usize,
    /// Standard deviation of Gaussian noise added to the one-hot block
    /// indicator features.
    pub feature_noise: f64,
    pub seed: u64,
}

/// Samples a stochastic block model graph with block-indicator features.
///
/// Node `i` belongs to block `i % num_blocks` (round-robin, so block sizes
/// differ by at most one) and is labeled with its block. Identical configs
/// produce byte-identical graphs: features consume the
/// `(seed, SBM, 0)` stream in node-major dimension order, edges the
/// `(seed, SBM, 1)` stream over pairs `u < v` in lexicographic order.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<Graph> {
    if cfg.num_nodes == 0 || cfg.num_blocks == 0 {
        return Err(Error::invalid("sbm needs at least one node and one block"));
    }
    if cfg.feature_dim < cfg.num_blocks {
        return Err(Error::invalid(format!(
            "feature_dim {} cannot one-hot encode {} blocks",
            cfg.feature_dim, cfg.num_blocks
        )));
    }
    for (name, p) in [("p_intra", cfg.p_intra), ("p_inter", cfg.p_inter)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("{name} = {p} is not in [0, 1]")));
        }
    }
    if !cfg.feature_noise.is_finite() || cfg.feature_noise < 0.0 {
        return Err(Error::invalid("feature_noise must be nonnegative"));
    }

    let n = cfg.num_nodes;
    let block = |i: usize| i % cfg.num_blocks;

    let mut feat_rng = Rng::substream(cfg.seed, stream::SBM, 0);
    let mut features = DenseMatrix::zeros(n, cfg.feature_dim);
    for i in 0..n {
        let row = features.row_mut(i);
        row[block(i)] = 1.0;
        if cfg.feature_noise > 0.0 {
            for x in row.iter_mut() {
                *x += cfg.feature_noise * feat_rng.normal();
            }
        }
    }

    let mut edge_rng = Rng::substream(cfg.seed, stream::SBM, 1);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block(u) == block(v) {
                cfg.p_intra
            } else {
                cfg.p_inter
            };
            if edge_rng.bernoulli(p) {
                edges.push((u, v));
            }
        }
    }

    let labels: Vec<usize> = (0..n).map(block).collect();
    Graph::new(features, Some(labels), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_features(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64)
    }

    #[test]
    fn construction_normalizes_edges() {
        // Unsorted input with a duplicate (both directions) and a self-loop.
        let edges = [(2usize, 0usize), (0, 1), (1, 0), (1, 1), (1, 2)];
        let weighted: Vec<(usize, usize, f64)> =
            edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        let (g, stats) = Graph::build(simple_features(3), None, &weighted, false).unwrap();
        assert_eq!(stats.self_loops_dropped, 1);
        assert_eq!(stats.duplicates_merged, 1);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.edge_list(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 0));
        assert!(!g.has_edge(0, 0));
    }

    #[test]
    fn degree_examples() {
        // Triangle: every node has degree 2.
        let tri = Graph::new(simple_features(3), None, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(tri.degrees().per_node, vec![2, 2, 2]);

        // Path on three nodes: 1, 2, 1.
        let path = Graph::new(simple_features(3), None, &[(0, 1), (1, 2)]).unwrap();
        let d = path.degrees();
        assert_eq!(d.per_node, vec![1, 2, 1]);
        assert_eq!((d.min, d.max), (1, 2));
        assert!((d.mean - 4.0 / 3.0).abs() < 1e-15);

        // Star with center 0 and three leaves.
        let star = Graph::new(simple_features(4), None, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.degrees().per_node, vec![3, 1, 1, 1]);

        // Edgeless graph.
        let empty = Graph::new(simple_features(3), None, &[]).unwrap();
        assert_eq!(empty.degrees().per_node, vec![0, 0, 0]);
        assert_eq!(empty.num_edges(), 0);
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        let g = generate_sbm(&SbmConfig {
            num_nodes: 60,
            num_blocks: 3,
            p_intra: 0.3,
            p_inter: 0.05,
            feature_dim: 3,
            feature_noise: 0.2,
            seed: 5,
        })
        .unwrap();
        let total: usize = g.degrees().per_node.iter().sum();
        assert_eq!(total, 2 * g.num_edges());
    }

    #[test]
    fn rejects_out_of_range_and_bad_weights() {
        let err = Graph::new(simple_features(3), None, &[(0, 5)]);
        assert!(matches!(err, Err(Error::IndexOutOfRange(_))));
        let err = Graph::new_weighted(simple_features(3), None, &[(0, 1, -2.0)]);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
        let err = Graph::new_weighted(simple_features(3), None, &[(0, 1, f64::NAN)]);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
        let err = Graph::new(simple_features(2), Some(vec![0]), &[]);
        assert!(matches!(err, Err(Error::MalformedInput(_))));
    }

    #[test]
    fn file_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let features = DenseMatrix::from_fn(5, 3, |i, j| {
            // Awkward values to exercise shortest round-trip printing.
            (i as f64 + 1.0) / (j as f64 + 3.0) * 0.123456789
        });
        let labels = vec![0usize, 1, 1, 0, 2];
        let g = Graph::new(features, Some(labels), &[(0, 1), (1, 2), (3, 4), (0, 4)]).unwrap();

        for fname in ["features.csv", "features.tgm"] {
            let e = dir.path().join("edges.txt");
            let f = dir.path().join(fname);
            let l = dir.path().join("labels.txt");
            save_graph(&g, &e, &f, Some(&l)).unwrap();
            let (back, stats) = load_graph(&e, &f, Some(&l)).unwrap();
            assert_eq!(stats, BuildStats::default());
            assert_eq!(back.edge_list(), g.edge_list());
            assert_eq!(back.features().data(), g.features().data());
            assert_eq!(back.labels(), g.labels());
            assert_eq!(back.content_hash(), g.content_hash());
        }
    }

    #[test]
    fn loader_tolerates_comments_and_reports_errors() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("edges.txt");
        let f = dir.path().join("features.csv");
        std::fs::write(&f, "1.0,2.0\n3.0,4.0\n5.0,6.0\n").unwrap();

        std::fs::write(&e, "# comment\n\n0 1\n1 2\n").unwrap();
        let (g, _) = load_graph(&e, &f, None).unwrap();
        assert_eq!(g.num_edges(), 2);

        std::fs::write(&e, "0 1 2\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, None),
            Err(Error::MalformedInput(_))
        ));

        std::fs::write(&e, "0 9\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, None),
            Err(Error::IndexOutOfRange(_))
        ));

        std::fs::write(&e, "0 x\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, None),
            Err(Error::MalformedInput(_))
        ));

        // Ragged feature rows.
        std::fs::write(&e, "0 1\n").unwrap();
        std::fs::write(&f, "1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, None),
            Err(Error::MalformedInput(_))
        ));

        // Non-finite feature.
        std::fs::write(&f, "1.0,NaN\n3.0,4.0\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, None),
            Err(Error::MalformedInput(_))
        ));

        // Label count mismatch and negative label.
        std::fs::write(&f, "1.0,2.0\n3.0,4.0\n").unwrap();
        let l = dir.path().join("labels.txt");
        std::fs::write(&l, "0\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, Some(&l)),
            Err(Error::MalformedInput(_))
        ));
        std::fs::write(&l, "0\n-1\n").unwrap();
        assert!(matches!(
            load_graph(&e, &f, Some(&l)),
            Err(Error::MalformedInput(_))
        ));
    }

    #[test]
    fn content_hash_tracks_content() {
        let g1 = Graph::new(simple_features(3), Some(vec![0, 1, 0]), &[(0, 1)]).unwrap();
        let g2 = Graph::new(simple_features(3), Some(vec![0, 1, 0]), &[(0, 1)]).unwrap();
        assert_eq!(g1.content_hash(), g2.content_hash());

        let extra_edge = Graph::new(simple_features(3), Some(vec![0, 1, 0]), &[(0, 1), (1, 2)])
            .unwrap();
        assert_ne!(g1.content_hash(), extra_edge.content_hash());

        let other_labels = Graph::new(simple_features(3), Some(vec![0, 1, 1]), &[(0, 1)]).unwrap();
        assert_ne!(g1.content_hash(), other_labels.content_hash());

        let mut feats = simple_features(3);
        feats.set(0, 0, 42.0);
        let other_feats = Graph::new(feats, Some(vec![0, 1, 0]), &[(0, 1)]).unwrap();
        assert_ne!(g1.content_hash(), other_feats.content_hash());
    }

    #[test]
    fn sbm_extremes_build_disjoint_cliques() {
        let g = generate_sbm(&SbmConfig {
            num_nodes: 40,
            num_blocks: 2,
            p_intra: 1.0,
            p_inter: 0.0,
            feature_dim: 2,
            feature_noise: 0.0,
            seed: 7,
        })
        .unwrap();
        // Two 20-cliques: C(20,2) edges each.
        assert_eq!(g.num_edges(), 2 * (20 * 19) / 2);
        for (u, v) in g.edge_list() {
            assert_eq!(u % 2, v % 2, "no edge may cross blocks");
        }
        // Noise-free features are exact one-hots of the block.
        for i in 0..40 {
            let row = g.features().row(i);
            assert_eq!(row[i % 2], 1.0);
            assert_eq!(row[1 - i % 2], 0.0);
        }
        assert_eq!(g.labels().unwrap()[3], 1);
    }

    #[test]
    fn sbm_intra_edge_count_within_four_sigma() {
        // 4 blocks of 50: 4 * C(50,2) = 4900 intra pairs at p = 0.2 gives
        // mean 980, sigma = sqrt(4900 * 0.2 * 0.8) = 28.
        let g = generate_sbm(&SbmConfig {
            num_nodes: 200,
            num_blocks: 4,
            p_intra: 0.2,
            p_inter: 0.02,
            feature_dim: 4,
            feature_noise: 0.1,
            seed: 11,
        })
        .unwrap();
        let labels = g.labels().unwrap();
        let intra = g
            .edge_list()
            .iter()
            .filter(|&&(u, v)| labels[u] == labels[v])
            .count() as f64;
        assert!((intra - 980.0).abs() < 4.0 * 28.0, "intra edges {intra}");
    }

    #[test]
    fn sbm_is_reproducible_and_validates() {
        let cfg = SbmConfig {
            num_nodes: 30,
            num_blocks: 3,
            p_intra: 0.5,
            p_inter: 0.1,
            feature_dim: 5,
            feature_noise: 0.3,
            seed: 13,
        };
        let a = generate_sbm(&cfg).unwrap();
        let b = generate_sbm(&cfg).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());

        let mut bad = cfg.clone();
        bad.p_intra = 1.5;
        assert!(generate_sbm(&bad).is_err());
        let mut bad = cfg.clone();
        bad.feature_dim = 2;
        assert!(generate_sbm(&bad).is_err());
    }
}
