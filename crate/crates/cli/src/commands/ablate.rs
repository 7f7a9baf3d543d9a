//! `topogcl ablate`: the six-variant grid over shared seeds, written as
//! merged JSON plus a markdown table.

use topogcl_core::ablation::{markdown_table, run_ablation, AblationConfig};
use topogcl_core::Result;

use crate::args::AblateArgs;
use crate::commands::apply_graph_flags;
use crate::config::{
    resolve_eval, resolve_graph, resolve_perturb_pair, resolve_train, Settings,
};
use crate::manifest::write_manifest;

pub fn run(args: &AblateArgs) -> Result<()> {
    let mut settings = Settings::load(args.common.config.as_deref())?;
    apply_graph_flags(&mut settings, &args.graph);
    settings.override_with("train.embed_dim", args.embed_dim);
    settings.override_with("train.epochs", args.epochs);
    settings.override_with("train.warmup", args.warmup);
    settings.override_with("train.prototypes", args.prototypes);
    settings.override_with("eval.probe_reps", args.probe_reps);
    settings.override_with("ablate.num_seeds", args.num_seeds);
    settings.override_with("ablate.feature_k", args.feature_k);
    settings.override_with("ablate.spectral_k", args.spectral_k);
    settings.override_with("ablate.spectral_alpha", args.spectral_alpha);

    let seed = args.common.seed;
    let (g, inputs) = resolve_graph(&settings)?;

    // Scheme parameters fall back to the shared [augment] keys.
    let default_k = settings.parse::<usize>("augment.k")?.unwrap_or(1);
    let default_alpha = settings.parse::<f64>("augment.alpha")?.unwrap_or(80.0);
    let feature_k = settings.parse_or("ablate.feature_k", default_k)?;
    let spectral_k = settings.parse_or("ablate.spectral_k", default_k)?;
    let spectral_alpha = settings.parse_or("ablate.spectral_alpha", default_alpha)?;

    let mut cfg = AblationConfig::new(resolve_train(&mut settings, seed)?);
    let (p_original, p_reorganized) = resolve_perturb_pair(&mut settings)?;
    cfg.perturb_original = p_original;
    cfg.perturb_reorganized = p_reorganized;
    cfg.feature_k = feature_k;
    cfg.spectral_k = spectral_k;
    cfg.spectral_alpha = spectral_alpha;
    cfg.eval = resolve_eval(&mut settings, seed)?;

    let num_seeds = settings.parse_or("ablate.num_seeds", 1usize)?;
    let seeds: Vec<u64> = (0..num_seeds as u64).map(|i| seed + i).collect();
    settings.set(
        "ablate.seeds",
        seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );

    let summaries = run_ablation(&g, &cfg, &seeds)?;
    let table = markdown_table(&summaries);

    std::fs::create_dir_all(&args.common.out)?;
    let json = serde_json::to_string_pretty(&summaries)?;
    std::fs::write(args.common.out.join("ablation.json"), json + "\n")?;
    std::fs::write(args.common.out.join("ablation.md"), &table)?;
    write_manifest(&args.common.out, "ablate", &settings, &inputs)?;

    print!("{table}");
    Ok(())
}
