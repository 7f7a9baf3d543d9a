//! `topogcl eval`: score a stored embedding matrix against a label file.

use topogcl_core::eval::evaluate;
use topogcl_core::graph::load_labels;
use topogcl_core::tgm::read_matrix;
use topogcl_core::{Error, Result};

use crate::args::EvalArgs;
use crate::config::{resolve_eval, Settings};
use crate::manifest::write_manifest;

pub fn run(args: &EvalArgs) -> Result<()> {
    let mut settings = Settings::load(args.common.config.as_deref())?;
    settings.override_with("eval.probe_reps", args.probe_reps);
    settings.override_with("eval.sim_ns", args.sim_ns.as_deref());
    settings.override_with("eval.clusters", args.clusters);
    settings.set("eval.embeddings", args.embeddings.display());
    settings.set("eval.labels", args.labels.display());

    let emb = read_matrix(&args.embeddings)?;
    if !emb.is_finite() {
        return Err(Error::numerical(
            format!(
                "{} contains non-finite values; the producing run diverged",
                args.embeddings.display()
            ),
            None,
        ));
    }
    let labels = load_labels(&args.labels, emb.rows())?;
    let opts = resolve_eval(&mut settings, args.common.seed)?;

    let report = evaluate(&emb, &labels, &opts)?;
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::create_dir_all(&args.common.out)?;
    std::fs::write(args.common.out.join("eval_report.json"), json.clone() + "\n")?;
    write_manifest(
        &args.common.out,
        "eval",
        &settings,
        &[args.embeddings.clone(), args.labels.clone()],
    )?;
    println!("{json}");
    Ok(())
}
