mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use artifacts::Artifacts;
use commands::Failure;
use config::ExperimentConfig;

const ENV_OUT: &str = "ROBIN_STOKES_OUT";
const ENV_THREADS: &str = "ROBIN_STOKES_THREADS";

#[derive(Parser)]
#[command(name = "robin-stokes", version, about = "Stokes flow on an annulus with a Robin inner boundary: forward solves and coefficient recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides ROBIN_STOKES_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the noise sweep (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides ROBIN_STOKES_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Mesh,
    SolveStationary,
    SolveEvolution,
    Eigs,
    Weights,
    CarlemanCheck,
    Invert,
    StabilityCurve,
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::SolveStationary => "solve-stationary",
            Command::SolveEvolution => "solve-evolution",
            Command::Eigs => "eigs",
            Command::Weights => "weights",
            Command::CarlemanCheck => "carleman-check",
            Command::Invert => "invert",
            Command::StabilityCurve => "stability-curve",
            Command::Report => "report",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text).map_err(|e| Failure::Config(e.0))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = cli.out.clone().or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from)) {
        cfg.output_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.inverse.seed = seed;
    }
    cfg.validate().map_err(|e| Failure::Config(e.0))?;
    Ok(cfg)
}

fn threads(cli: &Cli) -> Result<Option<usize>, Failure> {
    if cli.threads.is_some() {
        return Ok(cli.threads);
    }
    match std::env::var(ENV_THREADS) {
        Ok(v) => v.parse().map(Some).map_err(|_| Failure::Config(format!("{ENV_THREADS}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<(), (Failure, Option<Artifacts>)> {
    let cfg = load_config(cli).map_err(|e| (e, None))?;
    if let Some(n) = threads(cli).map_err(|e| (e, None))? {
        if n == 0 {
            return Err((Failure::Config("thread count must be at least 1".into()), None));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| (Failure::Config(e.to_string()), None))?;
    }
    let name = cli.command.name();
    let out = Artifacts::new(&cfg.output_dir, &cfg.hash(), name, cfg.inverse.seed)
        .map_err(|e| (Failure::Solver { stage: "output directory".into(), message: e.to_string() }, None))?;
    out.clear_marker().map_err(|e| (Failure::Solver { stage: "output directory".into(), message: e.to_string() }, None))?;
    log::info!("{name}: config {} -> {}", cfg.hash(), cfg.output_dir.display());
    let result = match cli.command {
        Command::Mesh => commands::mesh(&cfg, &out),
        Command::SolveStationary => commands::solve_stationary_cmd(&cfg, &out),
        Command::SolveEvolution => commands::solve_evolution(&cfg, &out),
        Command::Eigs => commands::eigs(&cfg, &out),
        Command::Weights => commands::weights(&cfg, &out),
        Command::CarlemanCheck => commands::carleman_check(&cfg, &out),
        Command::Invert => commands::invert(&cfg, &out),
        Command::StabilityCurve => commands::stability_curve(&cfg, &out),
        Command::Report => commands::report(&cfg, &out),
    };
    result.map_err(|e| (e, Some(out)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((failure, out)) => {
            eprintln!("error: {}", failure.message());
            if let Some(out) = out {
                out.mark_failed(&format!("{}/{}", cli.command.name(), failure.stage()), &failure.message());
            }
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
