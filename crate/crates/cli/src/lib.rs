//! Command-line front end of `jcdyn`: reads a JSON run configuration, runs
//! temperature and parameter sweeps on a worker pool and writes CSV tables.
//!
//! Every CSV starts with `# config_sha256=<hash>` of the resolved
//! configuration, which is also written to `resolved_config.json`. Rows that
//! fail are listed in `failures.csv`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

pub use args::Cli;
pub use commands::{Context, Failure, Report};
pub use config::RunConfig;
pub use error::CliError;

use args::Command;

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("--config {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

/// `--out` (or `JCDYN_OUT`), else `outputs.dir` of the config.
pub fn output_dir(cli_out: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    cli_out.map_or_else(|| cfg.outputs.dir.clone(), Path::to_path_buf)
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Config("--config: required".into()))?;
    let cfg = load_config(path)?;
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads: must be >= 1".into()));
    }
    let out = output_dir(cli.out.as_deref(), &cfg);
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    output::write_file(&out, "resolved_config.json", &cfg.resolved_json())?;

    let ctx = Context { config: &cfg, hash: cfg.hash(), out: &out };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    let report = pool.install(|| match &cli.command {
        Command::Spectra(a) => commands::cmd_spectra(&ctx, *a),
        Command::Peaks => commands::cmd_peaks(&ctx),
        Command::Blocks(a) => commands::cmd_blocks(&ctx, a),
        Command::EpMap(a) => commands::cmd_ep_map(&ctx, a),
        Command::Coefficients(a) => commands::cmd_coefficients(&ctx, a),
        Command::All(a) => commands::cmd_all(&ctx, *a),
    })?;
    commands::failures_csv(&ctx, &report.failures).write(&out, "failures.csv")?;
    report.status()?;
    Ok(report)
}
