//! `topogcl train`: run the contrastive trainer and persist a checkpoint,
//! the final embeddings, and a JSON-lines epoch log.

use std::fs::OpenOptions;
use std::io::{BufWriter, Write};

use topogcl_core::contrast::trainer::train_from;
use topogcl_core::tgm::{write_matrix, DType};
use topogcl_core::Result;

use crate::args::TrainArgs;
use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::commands::{apply_graph_flags, apply_scheme_flags, cached_view, resolve_cache_dir};
use crate::config::{
    resolve_graph, resolve_perturb_pair, resolve_scheme, resolve_train, Settings,
};
use crate::manifest::write_manifest;

pub fn run(args: &TrainArgs) -> Result<()> {
    let mut settings = Settings::load(args.common.config.as_deref())?;
    apply_graph_flags(&mut settings, &args.graph);
    apply_scheme_flags(&mut settings, &args.scheme);
    settings.override_with("train.embed_dim", args.embed_dim);
    settings.override_with("train.hidden_dim", args.hidden_dim);
    settings.override_with("train.tau", args.tau);
    settings.override_with("train.epochs", args.epochs);
    settings.override_with("train.warmup", args.warmup);
    settings.override_with("train.prototypes", args.prototypes);
    settings.override_with("train.lr", args.lr);
    settings.override_with("train.epsilon", args.epsilon);
    settings.override_with("train.pool", args.pool.as_deref());
    settings.override_with("train.checkpoint_every", args.checkpoint_every);
    settings.override_with("perturb.p_f", args.p_f);
    settings.override_with("perturb.p_e", args.p_e);
    settings.override_with("perturb.p_tau", args.p_tau);

    let seed = args.common.seed;
    let out = &args.common.out;
    let (g, inputs) = resolve_graph(&settings)?;

    let g_t = match resolve_scheme(&mut settings)? {
        None => g.clone(),
        Some(scheme) => {
            let cache_dir = resolve_cache_dir(&mut settings, args.cache_dir.as_deref(), out);
            cached_view(&g, &scheme, &cache_dir)?
        }
    };

    let mut cfg = resolve_train(&mut settings, seed)?;
    if args.warmup_only {
        cfg.warmup = cfg.epochs;
        settings.set("train.warmup", cfg.warmup);
    }
    settings.set("train.warmup_only", args.warmup_only);
    let (p_original, p_reorganized) = resolve_perturb_pair(&mut settings)?;
    let checkpoint_every = settings.parse_or("train.checkpoint_every", 25usize)?;

    let resume_state = match &args.resume {
        None => None,
        Some(dir) => {
            let state = load_checkpoint(dir, seed)?;
            println!(
                "resuming from {} at epoch {}",
                dir.display(),
                state.next_epoch
            );
            settings.set("train.resumed_from", dir.display());
            Some(state)
        }
    };

    std::fs::create_dir_all(out)?;
    let ckpt_dir = out.join("checkpoint");
    let log_path = out.join("train_log.jsonl");
    let log_file = if resume_state.is_some() {
        OpenOptions::new().create(true).append(true).open(&log_path)?
    } else {
        std::fs::File::create(&log_path)?
    };
    let mut log = BufWriter::new(log_file);

    let output = train_from(
        &g,
        &g_t,
        &cfg,
        &p_original,
        &p_reorganized,
        resume_state,
        |record, params, adam| {
            let line = serde_json::to_string(record)?;
            writeln!(log, "{line}")?;
            let done = record.epoch + 1;
            if checkpoint_every > 0 && done % checkpoint_every == 0 && done < cfg.epochs {
                log.flush()?;
                save_checkpoint(&ckpt_dir, params, adam, done, seed)?;
            }
            Ok(())
        },
    )?;
    log.flush()?;

    save_checkpoint(&ckpt_dir, &output.params, &output.adam, cfg.epochs, seed)?;
    let emb_path = out.join("embeddings.tgm");
    write_matrix(&emb_path, &output.embeddings, DType::F32)?;
    write_manifest(out, "train", &settings, &inputs)?;

    match output.log.last() {
        Some(last) => println!(
            "trained {} epochs (final loss {:.6}, filtered fraction {:.4})",
            cfg.epochs, last.loss, last.filtered_fraction
        ),
        None => println!("checkpoint already covered all {} epochs", cfg.epochs),
    }
    println!(
        "wrote {} ({}x{} f32), checkpoint, and {}",
        emb_path.display(),
        output.embeddings.rows(),
        output.embeddings.cols(),
        log_path.display()
    );
    Ok(())
}
