//! Batch pipeline driver. Exit codes: 0 success, 2 configuration or input
//! error, 3 numerical failure. Set `TOPOGCL_THREADS` to bound the worker
//! pool; every subcommand requires an explicit `--seed`.

fn main() {
    if let Err(err) = topogcl_cli::run() {
        eprintln!("error: {err}");
        std::process::exit(topogcl_cli::exit_code(&err));
    }
}
