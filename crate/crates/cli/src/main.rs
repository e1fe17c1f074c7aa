use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semiview_cli::config::ExperimentConfig;
use semiview_cli::report::{render, ReportFormat};
use semiview_cli::runner::{execute, inspect_splits, load_records};
use semiview_cli::solve::{execute_solve, SolveArgs};
use semiview_cli::CliResult;

/// Semi-paired two-view subspace learning experiments.
#[derive(Parser)]
#[command(name = "semiview", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment grid described by a config file.
    Run {
        config: PathBuf,
        /// Offset added to every trial seed.
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
    },
    /// Render summary tables and per-k series from a records file.
    Report {
        results: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Inspect the split protocol of a config.
    Split {
        /// Print per-seed split sizes.
        #[arg(long, required = true)]
        inspect: bool,
        config: PathBuf,
    },
    /// Fit a single model and write the projection matrices.
    Solve(SolveArgs),
}

fn init_parallelism(configured: usize) {
    let from_env = std::env::var("SEMIVIEW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let threads = from_env.unwrap_or(configured);
    if threads > 0 {
        // ignore failure: the global pool may already be initialized
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, seed_base } => {
            let config = ExperimentConfig::from_path(&config)?;
            init_parallelism(config.experiment.parallelism);
            let outcome = execute(&config, seed_base)?;
            if outcome.n_resumed > 0 {
                eprintln!("resumed {} completed trials", outcome.n_resumed);
            }
            println!(
                "wrote {} records to {}",
                outcome.n_records,
                outcome.records_path.display()
            );
            println!("summary at {}", outcome.summary_path.display());
            Ok(())
        }
        Command::Report { results, format } => {
            let format: ReportFormat = format
                .parse()
                .map_err(semiview_cli::CliError::Config)?;
            let records = load_records(&results)?;
            render(&records, format, std::io::stdout().lock())?;
            Ok(())
        }
        Command::Split { inspect: _, config } => {
            let config = ExperimentConfig::from_path(&config)?;
            inspect_splits(&config, std::io::stdout().lock())?;
            Ok(())
        }
        Command::Solve(args) => {
            execute_solve(&args, std::io::stdout().lock())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // structured single-line error for scripting
            let msg = serde_json::json!({ "error": e.to_string() });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
