use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbnn_cli::{
    monotonicity_warnings, parse_spec, run_experiment, write_csv, write_gnuplot, ExperimentSpec,
};

/// Monte Carlo benchmarks for clique-network associative memories.
#[derive(Parser)]
#[command(name = "bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a spec file and write a CSV report.
    Run {
        /// Experiment spec file (`key = value` plus `[config <name>]` sections).
        spec: PathBuf,
        /// Output CSV path.
        #[arg(short, long)]
        output: PathBuf,
        /// Override the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Re-check pairwise connections whenever the clique criterion fires
        /// and report how often certification was genuine.
        #[arg(long)]
        strict_clique: bool,
        /// Also emit one whitespace-separated .dat file per config.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Parse and validate a spec file without running anything.
    Validate {
        spec: PathBuf,
    },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_SPEC: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { spec, output, seed, threads, strict_clique, gnuplot } => {
            run(spec, output, seed, threads, strict_clique, gnuplot)
        }
        Command::Validate { spec } => validate(spec),
    }
}

fn load_spec(path: &std::path::Path) -> Result<ExperimentSpec, ExitCode> {
    match parse_spec(path) {
        Ok(spec) => Ok(spec),
        Err(err) => {
            eprintln!("{}: {err}", path.display());
            Err(ExitCode::from(EXIT_SPEC))
        }
    }
}

fn run(
    spec_path: PathBuf,
    output: PathBuf,
    seed: Option<u64>,
    threads: Option<usize>,
    strict_clique: bool,
    gnuplot: bool,
) -> ExitCode {
    let mut spec = match load_spec(&spec_path) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if strict_clique {
        for config in &mut spec.configs {
            config.retrieval.strict_clique = true;
        }
    }
    for warning in spec.warnings() {
        eprintln!("warning: {warning}");
    }
    if let Some(threads) = threads {
        if let Err(err) =
            rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()
        {
            eprintln!("cannot size the thread pool: {err}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }

    let rows = match run_experiment(&spec) {
        Ok(rows) => rows,
        Err(err) => {
            eprintln!("run failed: {err}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    for warning in monotonicity_warnings(&rows) {
        eprintln!("warning: {warning}");
    }
    if strict_clique {
        for row in &rows {
            if row.clique_stops > 0 {
                eprintln!(
                    "strict clique check: {}/{} verified for `{}` at M = {}",
                    row.clique_verified, row.clique_stops, row.config, row.messages
                );
            }
        }
    }

    if let Err(err) = write_csv(&rows, &output) {
        eprintln!("cannot write {}: {err}", output.display());
        return ExitCode::from(EXIT_RUNTIME);
    }
    if gnuplot {
        match write_gnuplot(&rows, &output) {
            Ok(files) => {
                for file in files {
                    println!("wrote {}", file.display());
                }
            }
            Err(err) => {
                eprintln!("cannot write plot data: {err}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    println!("wrote {} rows to {}", rows.len(), output.display());
    ExitCode::SUCCESS
}

fn validate(spec_path: PathBuf) -> ExitCode {
    let spec = match load_spec(&spec_path) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    println!(
        "ok: {} clusters of {} fanals, order {}, {} erasures, {} counts, {} trials, seed {}",
        spec.shape.clusters(),
        spec.shape.cluster_size(),
        spec.order,
        spec.erasures,
        spec.message_counts.len(),
        spec.trials,
        spec.seed
    );
    for config in &spec.configs {
        println!("  config {}", config.name);
    }
    if spec.include_oracle {
        println!("  config {} (brute-force baseline)", gbnn_cli::runner::ORACLE_NAME);
    }
    for warning in spec.warnings() {
        eprintln!("warning: {warning}");
    }
    ExitCode::SUCCESS
}
