use std::path::PathBuf;
use std::process::ExitCode;

use adacomb_experiments::{config, presets, run, write_outputs};
use clap::{Parser, Subcommand};

/// Run adaptive-filter combination experiments and write CSV results.
#[derive(Parser)]
#[command(name = "adacomb", version)]
struct Cli {
    /// Worker threads for ensemble runs (default: all cores).
    #[arg(long, global = true, env = "ADACOMB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV files.
    Run {
        /// Configuration file, or `preset:<name>` for a shipped preset.
        #[arg(long)]
        config: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the number of runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: String,
    },
    /// List the shipped presets.
    ListPresets,
}

fn read_config(spec: &str) -> anyhow::Result<String> {
    if let Some(name) = spec.strip_prefix("preset:") {
        return presets::get(name)
            .map(str::to_string)
            .ok_or_else(|| anyhow::anyhow!("unknown preset \"{name}\" (see list-presets)"));
    }
    std::fs::read_to_string(spec).map_err(|e| anyhow::anyhow!("cannot read {spec}: {e}"))
}

fn load(spec: &str) -> anyhow::Result<config::Loaded> {
    let loaded = config::parse(&read_config(spec)?)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded)
}

fn main_inner(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "thread count must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Run { config, out, runs, seed } => {
            let mut cfg = load(&config)?.config;
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outputs = run(&cfg)?;
            for path in write_outputs(&outputs, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config)?.config;
            println!("ok: {} ({} runs, seed {})", cfg.experiment, cfg.runs, cfg.seed);
        }
        Command::ListPresets => {
            for (name, doc) in presets::PRESETS {
                println!("{name:<18} {}", presets::description(doc));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
