use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use structmc_cli::{parse_config, run, CliError, Command};

/// Structured Monte Carlo ensembles, benchmarks and diagnostics.
#[derive(Debug, Parser)]
#[command(name = "structmc", version)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; never changes output bytes.
    #[arg(long, env = "STRUCTMC_THREADS")]
    threads: Option<usize>,
    /// Output directory, overriding the configuration's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config { path: "--threads".into(), msg: e.to_string() })?;
    }
    let text = std::fs::read_to_string(&cli.config).map_err(|source| CliError::Io { path: cli.config.clone(), source })?;
    let mut cfg = parse_config(&text)?;
    if cfg.command() != cli.command {
        return Err(CliError::Config {
            path: "command".into(),
            msg: format!("configuration is for `{}`, but `{}` was invoked", cfg.command(), cli.command),
        });
    }
    if let Some(out) = cli.out {
        cfg.set_out(out);
    }
    run(&cfg)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("structmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
