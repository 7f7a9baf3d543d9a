//! `topogcl augment`: build the reorganized topology view, cache it, and
//! report how it relates to the original graph.

use serde::Serialize;
use topogcl_core::{Error, Graph, Result};

use crate::args::AugmentArgs;
use crate::commands::{apply_graph_flags, apply_scheme_flags, cached_view, resolve_cache_dir};
use crate::config::{resolve_graph, resolve_scheme, Settings};
use crate::manifest::write_manifest;

/// Edge-level comparison of the reorganized view against the original.
#[derive(Debug, Serialize)]
pub struct ViewStats {
    pub original_edges: usize,
    pub view_edges: usize,
    /// Edges in both graphs.
    pub shared_edges: usize,
    /// View edges absent from the original.
    pub new_edges: usize,
    /// |E ∩ E_T| / |E ∪ E_T|.
    pub jaccard: f64,
    /// Fraction of view edges joining same-label endpoints.
    pub intra_class_view: Option<f64>,
    /// Fraction of the new edges joining same-label endpoints.
    pub intra_class_new: Option<f64>,
}

/// Both edge lists are sorted lexicographically, so the intersection is a
/// linear merge.
pub fn view_stats(g: &Graph, g_t: &Graph) -> ViewStats {
    let a = g.edge_list();
    let b = g_t.edge_list();
    let mut shared = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - shared;
    let intra = |edges: &[(usize, usize)]| {
        g.labels().map(|labels| {
            if edges.is_empty() {
                return 0.0;
            }
            let same = edges
                .iter()
                .filter(|&&(u, v)| labels[u] == labels[v])
                .count();
            same as f64 / edges.len() as f64
        })
    };
    let new_edges: Vec<(usize, usize)> = b
        .iter()
        .filter(|e| a.binary_search(e).is_err())
        .copied()
        .collect();
    ViewStats {
        original_edges: a.len(),
        view_edges: b.len(),
        shared_edges: shared,
        new_edges: new_edges.len(),
        jaccard: if union == 0 {
            1.0
        } else {
            shared as f64 / union as f64
        },
        intra_class_view: intra(&b),
        intra_class_new: intra(&new_edges),
    }
}

pub fn run(args: &AugmentArgs) -> Result<()> {
    let mut settings = Settings::load(args.common.config.as_deref())?;
    apply_graph_flags(&mut settings, &args.graph);
    apply_scheme_flags(&mut settings, &args.scheme);

    let (g, inputs) = resolve_graph(&settings)?;
    let scheme = resolve_scheme(&mut settings)?
        .ok_or_else(|| Error::invalid("augment needs a topology scheme (feature or spectral)"))?;
    let cache_dir = resolve_cache_dir(
        &mut settings,
        args.cache_dir.as_deref(),
        &args.common.out,
    );

    let g_t = cached_view(&g, &scheme, &cache_dir)?;
    let stats = view_stats(&g, &g_t);

    println!(
        "edges: original {}, view {}, shared {}, new {} (jaccard {:.4})",
        stats.original_edges, stats.view_edges, stats.shared_edges, stats.new_edges, stats.jaccard
    );
    if let (Some(view), Some(new)) = (stats.intra_class_view, stats.intra_class_new) {
        println!(
            "intra-class fraction: view edges {:.4}, new edges {:.4}",
            view, new
        );
    }

    std::fs::create_dir_all(&args.common.out)?;
    let json = serde_json::to_string_pretty(&stats)?;
    std::fs::write(args.common.out.join("augment_stats.json"), json + "\n")?;
    write_manifest(&args.common.out, "augment", &settings, &inputs)?;
    Ok(())
}
