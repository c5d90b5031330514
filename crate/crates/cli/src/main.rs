use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fslab::config::{load, Command};
use fslab::error::CliError;
use fslab::{configure_threads, execute, suite, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};

#[derive(Parser)]
#[command(name = "fslab", version, about = "Configured experiments on difference-based function-space quasi-norms")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quasi-norms of one function.
    Norm(RunArgs),
    /// Dilation exponent fit.
    Homogeneity(RunArgs),
    /// Level stability of norm ratios on a corpus.
    Equivalence(RunArgs),
    /// Embedding probe across levels.
    Embed(RunArgs),
    /// Entropy numbers of sequence-space embeddings.
    Entropy(RunArgs),
    /// Pointwise multiplier bound across λ.
    Multiplier(RunArgs),
    /// Exact scaling identities and polynomial annihilation.
    Identities(RunArgs),
    /// The full acceptance grid with fixed seeds.
    Suite {
        #[arg(long, default_value = "fslab-suite")]
        out: PathBuf,
    },
}

fn fail(e: CliError) -> ExitCode {
    println!("{}", e.to_json());
    ExitCode::from(EXIT_ERROR)
}

fn status(passed: bool) -> ExitCode {
    ExitCode::from(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    let (command, args) = match cli.command {
        Cmd::Norm(a) => (Command::Norm, a),
        Cmd::Homogeneity(a) => (Command::Homogeneity, a),
        Cmd::Equivalence(a) => (Command::Equivalence, a),
        Cmd::Embed(a) => (Command::Embed, a),
        Cmd::Entropy(a) => (Command::Entropy, a),
        Cmd::Multiplier(a) => (Command::Multiplier, a),
        Cmd::Identities(a) => (Command::Identities, a),
        Cmd::Suite { out } => {
            let result = suite::run_suite(&out, |e| {
                println!("{} {}", if e.passed { "PASS" } else { "FAIL" }, e.name);
            });
            return match result {
                Ok(entries) => status(entries.iter().all(|e| e.passed)),
                Err(e) => fail(e),
            };
        }
    };
    let prepared = match load(command, &args.config, args.out, args.seed) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match execute(&prepared) {
        Ok(passed) => {
            println!(
                "{} {}",
                if passed { "PASS" } else { "FAIL" },
                prepared.output_dir.join("report.json").display()
            );
            status(passed)
        }
        Err(e) => fail(e),
    }
}
