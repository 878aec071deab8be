mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Failure, Invocation, EXIT_CONFIG};
use config::{Mode, RunConfig};
use dba::verify::Fault;

/// Builds and verifies commuting difference operators from a JSON config.
#[derive(Debug, Parser)]
#[command(name = "dba", version)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `mode` in the config.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Negative control for the test suites.
    #[arg(long, value_name = "NAME")]
    inject_fault: Option<String>,
}

fn invocation(args: &Args) -> Result<Invocation, Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Failure::config(format!("reading {}: {e}", args.config.display())))?;
    let config = RunConfig::parse(&text).map_err(Failure::config)?;
    let mode = args.mode.or(config.mode).ok_or_else(|| Failure::config("no mode: pass --mode or set `mode`"))?;
    let fault = args.inject_fault.as_deref().map(str::parse::<Fault>).transpose().map_err(|e| Failure::config(e.to_string()))?;
    Ok(Invocation { out: args.out.clone().or_else(|| config.out.clone()), seed: args.seed.or(config.seed).unwrap_or(42), mode, fault, config })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DBA_LOG", "warn")).init();
    let args = Args::parse();
    if let Some(j) = args.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let code = match invocation(&args).and_then(|inv| commands::run(&inv)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    ExitCode::from(code as u8)
}
