//! One module per subcommand, plus flag-merging helpers shared between
//! them.

pub mod ablate;
pub mod augment;
pub mod eval;
pub mod sbm;
pub mod train;

use std::path::{Path, PathBuf};

use topogcl_core::topo::{cached_topology_view, TopoScheme};
use topogcl_core::{Graph, Result};

use crate::args::{GraphFlags, SchemeFlags};
use crate::config::Settings;

/// Folds graph-path flags into the settings (flags win).
pub fn apply_graph_flags(settings: &mut Settings, flags: &GraphFlags) {
    settings.override_with("graph.edges", flags.edges.as_ref().map(|p| p.display()));
    settings.override_with(
        "graph.features",
        flags.features.as_ref().map(|p| p.display()),
    );
    settings.override_with("graph.labels", flags.labels.as_ref().map(|p| p.display()));
}

/// Folds scheme flags into the settings (flags win).
pub fn apply_scheme_flags(settings: &mut Settings, flags: &SchemeFlags) {
    settings.override_with("augment.scheme", flags.scheme.as_deref());
    settings.override_with("augment.k", flags.k);
    settings.override_with("augment.alpha", flags.alpha);
}

/// Resolves the topology cache directory: flag, then config key, then
/// `<out>/cache`; the effective value is recorded in the settings.
pub fn resolve_cache_dir(
    settings: &mut Settings,
    flag: Option<&Path>,
    out: &Path,
) -> PathBuf {
    settings.override_with("augment.cache_dir", flag.map(|p| p.display()));
    let dir = settings
        .raw("augment.cache_dir")
        .map(PathBuf::from)
        .unwrap_or_else(|| out.join("cache"));
    settings.set("augment.cache_dir", dir.display());
    dir
}

/// Fetches the reorganized view through the disk cache, announcing whether
/// the cache was hit.
pub fn cached_view(g: &Graph, scheme: &TopoScheme, cache_dir: &Path) -> Result<Graph> {
    let (g_t, hit) = cached_topology_view(g, scheme, cache_dir)?;
    if hit {
        println!(
            "topology cache hit: reused {} view from {}",
            scheme.name(),
            cache_dir.display()
        );
    } else {
        println!(
            "topology cache miss: computed {} view and stored it in {}",
            scheme.name(),
            cache_dir.display()
        );
    }
    Ok(g_t)
}
