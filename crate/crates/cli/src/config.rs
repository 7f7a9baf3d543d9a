//! Layered run configuration: a line-based `key = value` file with
//! `[section]` headers, overridden by command-line flags, padded with
//! defaults. After resolution every effective setting is readable back out
//! of the [`Settings`] map, which is what the run manifest records.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use topogcl_core::contrast::NegativePool;
use topogcl_core::eval::{ClusteringOptions, EvalOptions, NmiNorm, ProbeOptions};
use topogcl_core::graph::{load_graph, Graph};
use topogcl_core::topo::TopoScheme;
use topogcl_core::{Activation, Error, PerturbConfig, Result, TrainConfig};

/// Flat view of the configuration: section headers become key prefixes, so
/// `tau = 0.4` under `[train]` is stored as `train.tau`.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Settings {
        Settings::default()
    }

    /// Parses a config file. Blank lines and lines starting with `#` or `;`
    /// are ignored; later duplicates win.
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path)?;
        let mut settings = Settings::new();
        let mut section = String::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = name.trim().to_string();
                if section.is_empty() {
                    return Err(Error::malformed(format!(
                        "{}:{}: empty section name",
                        path.display(),
                        lineno + 1
                    )));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::malformed(format!(
                    "{}:{}: expected 'key = value' or '[section]', got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::malformed(format!(
                    "{}:{}: empty key",
                    path.display(),
                    lineno + 1
                )));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            settings.values.insert(full, value.trim().to_string());
        }
        Ok(settings)
    }

    /// Loads the file when given, otherwise starts empty.
    pub fn load(path: Option<&Path>) -> Result<Settings> {
        match path {
            Some(p) => Settings::from_file(p),
            None => Ok(Settings::new()),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Applies a command-line flag on top of the file: the flag wins when
    /// present.
    pub fn override_with(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed read of an optional key.
    pub fn parse<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                Error::invalid(format!("config key '{key}': cannot parse '{raw}': {e}"))
            }),
        }
    }

    /// Typed read with a default; the effective value is written back so
    /// the resolved map is complete.
    pub fn parse_or<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match self.parse::<T>(key)? {
            Some(v) => v,
            None => default,
        };
        self.set(key, &value);
        Ok(value)
    }

    /// Typed read of a mandatory key.
    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.parse(key)?
            .ok_or_else(|| Error::invalid(format!("missing required config key '{key}'")))
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        Ok(PathBuf::from(self.require::<String>(key)?))
    }

    /// The fully resolved key/value map, for the manifest.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

/// Loads the graph named by `graph.edges` / `graph.features` /
/// `graph.labels`, returning it together with the list of files read (for
/// manifest hashing).
pub fn resolve_graph(settings: &Settings) -> Result<(Graph, Vec<PathBuf>)> {
    let edges = settings.require_path("graph.edges")?;
    let features = settings.require_path("graph.features")?;
    let labels = settings
        .raw("graph.labels")
        .map(PathBuf::from)
        .filter(|p| !p.as_os_str().is_empty());
    let (graph, stats) = load_graph(&edges, &features, labels.as_deref())?;
    if stats.self_loops_dropped > 0 || stats.duplicates_merged > 0 {
        eprintln!(
            "note: dropped {} self-loop(s) and merged {} duplicate edge(s) on load",
            stats.self_loops_dropped, stats.duplicates_merged
        );
    }
    let mut inputs = vec![edges, features];
    inputs.extend(labels);
    Ok((graph, inputs))
}

/// Resolves `augment.scheme` (+ `k`, `alpha`) into a topology scheme;
/// `scheme = none` means the second view reuses the original graph.
pub fn resolve_scheme(settings: &mut Settings) -> Result<Option<TopoScheme>> {
    let name = settings.parse_or("augment.scheme", "spectral".to_string())?;
    let scheme = match name.as_str() {
        "none" => None,
        "feature" => {
            let k = settings.parse_or("augment.k", 1usize)?;
            Some(TopoScheme::FeatureKnn { k })
        }
        "spectral" => {
            let k = settings.parse_or("augment.k", 1usize)?;
            let alpha = settings.parse_or("augment.alpha", 80.0f64)?;
            Some(TopoScheme::SpectralPower { k, alpha })
        }
        other => {
            return Err(Error::invalid(format!(
                "augment.scheme must be feature, spectral, or none, got '{other}'"
            )))
        }
    };
    if let Some(ref s) = scheme {
        s.validate()?;
    }
    Ok(scheme)
}

/// Perturbation for the original view (`[perturb]`) and the reorganized
/// view (`[perturb2]`, falling back to `[perturb]` values).
pub fn resolve_perturb_pair(settings: &mut Settings) -> Result<(PerturbConfig, PerturbConfig)> {
    let defaults = PerturbConfig::default();
    let base = PerturbConfig {
        p_f: settings.parse_or("perturb.p_f", defaults.p_f)?,
        p_e: settings.parse_or("perturb.p_e", defaults.p_e)?,
        p_tau: settings.parse_or("perturb.p_tau", defaults.p_tau)?,
    };
    let second = PerturbConfig {
        p_f: settings.parse_or("perturb2.p_f", base.p_f)?,
        p_e: settings.parse_or("perturb2.p_e", base.p_e)?,
        p_tau: settings.parse_or("perturb2.p_tau", base.p_tau)?,
    };
    base.validate()?;
    second.validate()?;
    Ok((base, second))
}

/// Builds the trainer configuration from `[train]` keys, with the library
/// defaults filling gaps. The seed always comes from the command line.
pub fn resolve_train(settings: &mut Settings, seed: u64) -> Result<TrainConfig> {
    let embed_dim = settings.parse_or("train.embed_dim", 64usize)?;
    let mut cfg = TrainConfig::new(embed_dim, seed);
    cfg.hidden_dim = Some(settings.parse_or("train.hidden_dim", cfg.hidden())?);
    let act = settings.parse_or("train.activation", cfg.activation.name().to_string())?;
    cfg.activation = Activation::from_name(&act)?;
    cfg.tau = settings.parse_or("train.tau", cfg.tau)?;
    cfg.epochs = settings.parse_or("train.epochs", cfg.epochs)?;
    cfg.warmup = settings.parse_or("train.warmup", cfg.warmup.min(cfg.epochs))?;
    cfg.prototypes = settings.parse_or("train.prototypes", cfg.prototypes)?;
    cfg.kmeans_iters = settings.parse_or("train.kmeans_iters", cfg.kmeans_iters)?;
    cfg.epsilon = settings.parse_or("train.epsilon", cfg.epsilon)?;
    cfg.lr = settings.parse_or("train.lr", cfg.lr)?;
    let pool = settings.parse_or("train.pool", cfg.pool.name().to_string())?;
    cfg.pool = NegativePool::from_name(&pool)?;
    settings.set("train.seed", seed);
    Ok(cfg)
}

/// Builds evaluation options from `[eval]` keys.
pub fn resolve_eval(settings: &mut Settings, seed: u64) -> Result<EvalOptions> {
    let probe_defaults = ProbeOptions::default();
    let probe = ProbeOptions {
        fractions: (
            settings.parse_or("eval.train_fraction", probe_defaults.fractions.0)?,
            settings.parse_or("eval.val_fraction", probe_defaults.fractions.1)?,
        ),
        l2: settings.parse_or("eval.l2", probe_defaults.l2)?,
        reps: settings.parse_or("eval.probe_reps", probe_defaults.reps)?,
        lr: settings.parse_or("eval.probe_lr", probe_defaults.lr)?,
        max_epochs: settings.parse_or("eval.probe_epochs", probe_defaults.max_epochs)?,
        patience: settings.parse_or("eval.patience", probe_defaults.patience)?,
        seed,
    };
    let cluster_defaults = ClusteringOptions::default();
    let norm = settings.parse_or("eval.nmi_norm", "geometric".to_string())?;
    let clustering = ClusteringOptions {
        clusters: settings.parse::<usize>("eval.clusters")?,
        reps: settings.parse_or("eval.cluster_reps", cluster_defaults.reps)?,
        kmeans_iters: settings.parse_or("eval.cluster_iters", cluster_defaults.kmeans_iters)?,
        seed,
        norm: match norm.as_str() {
            "geometric" => NmiNorm::Geometric,
            "arithmetic" => NmiNorm::Arithmetic,
            other => {
                return Err(Error::invalid(format!(
                    "eval.nmi_norm must be geometric or arithmetic, got '{other}'"
                )))
            }
        },
    };
    let sim_raw = settings.parse_or("eval.sim_ns", "5,10".to_string())?;
    let mut sim_ns = Vec::new();
    for part in sim_raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        sim_ns.push(part.parse::<usize>().map_err(|_| {
            Error::invalid(format!("eval.sim_ns: '{part}' is not a neighborhood size"))
        })?);
    }
    if sim_ns.is_empty() {
        return Err(Error::invalid("eval.sim_ns must list at least one size"));
    }
    settings.set("eval.seed", seed);
    Ok(EvalOptions {
        probe,
        clustering,
        sim_ns,
    })
}
