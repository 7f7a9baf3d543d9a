//! `topogcl sbm-gen`: write a stochastic block model benchmark graph in
//! the formats the other subcommands read.

use topogcl_core::graph::{generate_sbm, save_graph, SbmConfig};
use topogcl_core::Result;

use crate::args::SbmGenArgs;
use crate::config::Settings;
use crate::manifest::write_manifest;

pub fn run(args: &SbmGenArgs) -> Result<()> {
    let mut settings = Settings::load(args.common.config.as_deref())?;
    settings.override_with("sbm.nodes", args.nodes);
    settings.override_with("sbm.blocks", args.blocks);
    settings.override_with("sbm.p_in", args.p_in);
    settings.override_with("sbm.p_out", args.p_out);
    settings.override_with("sbm.feature_dim", args.feature_dim);
    settings.override_with("sbm.noise", args.noise);
    if args.csv_features {
        settings.set("sbm.csv_features", true);
    }

    let cfg = SbmConfig {
        num_nodes: settings.parse_or("sbm.nodes", 400usize)?,
        num_blocks: settings.parse_or("sbm.blocks", 4usize)?,
        p_intra: settings.parse_or("sbm.p_in", 0.15f64)?,
        p_inter: settings.parse_or("sbm.p_out", 0.02f64)?,
        feature_dim: settings.parse_or("sbm.feature_dim", 32usize)?,
        feature_noise: settings.parse_or("sbm.noise", 0.5f64)?,
        seed: args.common.seed,
    };
    settings.set("sbm.seed", args.common.seed);
    let csv = settings.parse_or("sbm.csv_features", false)?;

    let g = generate_sbm(&cfg)?;
    let out = &args.common.out;
    std::fs::create_dir_all(out)?;
    let edges_path = out.join("edges.txt");
    let features_path = out.join(if csv { "features.csv" } else { "features.tgm" });
    let labels_path = out.join("labels.txt");
    save_graph(&g, &edges_path, &features_path, Some(&labels_path))?;
    write_manifest(out, "sbm-gen", &settings, &[])?;

    println!(
        "generated SBM: {} nodes, {} blocks, {} edges, content hash {}",
        g.num_nodes(),
        cfg.num_blocks,
        g.num_edges(),
        g.content_hash()
    );
    println!(
        "wrote {}, {}, {}",
        edges_path.display(),
        features_path.display(),
        labels_path.display()
    );
    Ok(())
}
