use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qem_lab::config::METHOD_HELP;
use qem_lab::{run, validate_file, LabError, RunArgs, Severity};

#[derive(Debug, Parser)]
#[command(name = "qemlab", version, about = "Linear error-mitigation experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sweep and write results, reports, plot data and a manifest.
    Run {
        config: PathBuf,
        /// Parallel experiments (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: config output_dir, then $QEMLAB_OUT_DIR, then ./qemlab-out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip shot sampling.
        #[arg(long)]
        exact_only: bool,
        /// Also write each experiment's mitigated shots.
        #[arg(long)]
        write_shots: bool,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List configurable methods and their parameters.
    ListMethods,
}

fn fail(e: &LabError) -> ExitCode {
    eprintln!("qemlab: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            jobs,
            seed,
            out,
            exact_only,
            write_shots,
        } => {
            let args = RunArgs {
                config,
                jobs,
                seed,
                out,
                exact_only,
                write_shots,
            };
            match run(&args) {
                Ok(s) => {
                    let flagged = s.outcomes.iter().filter(|o| o.sampled.as_ref().is_some_and(|x| x.warning.is_some())).count();
                    println!("{} experiments -> {}", s.outcomes.len(), s.out_dir.display());
                    if flagged > 0 {
                        println!("{flagged} ratio estimates flagged as unreliable (see reports.jsonl)");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { config } => match validate_file(&config) {
            Ok(diags) if diags.is_empty() => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Ok(diags) => {
                for d in &diags {
                    println!("{d}");
                }
                let schema = diags.iter().any(|d| d.severity == Severity::Schema);
                ExitCode::from(if schema { 2 } else { 3 })
            }
            Err(e) => fail(&e),
        },
        Command::ListMethods => {
            for (name, help) in METHOD_HELP {
                println!("{name:<14}{help}");
            }
            ExitCode::SUCCESS
        }
    }
}
