use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ufbd_cli::commands::{self, SimulateOptions, Suite, VerifyOptions, DEFAULT_FUEL};
use ufbd_core::dialogue::{FeedbackStrategy, PresentationStrategy, ProtocolKind};
use ufbd_core::hypothesis::Mode;
use ufbd_core::verify::{TargetSelection, VerificationReport};

#[derive(Parser)]
#[command(name = "ufbd", version, about = "User-feedback dialogues over hypothesis graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Halting,
    Convergence,
    Counterexamples,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetsArg {
    All,
    Singletons,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulated dialogue and print its transcript.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        protocol: Option<ProtocolKind>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        bound: Option<usize>,
        /// A file with target entries; overrides the config's target.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Maximum number of moves.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "canonical")]
        presenter: PresentationStrategy,
        #[arg(long, default_value = "canonical")]
        feedback: FeedbackStrategy,
    },
    /// Check halting, convergence or the counterexample constructions.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        protocol: Option<ProtocolKind>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        bound: Option<usize>,
        /// Feedback rounds allowed before a branch counts as non-halting.
        #[arg(long)]
        fuel: Option<usize>,
        /// Target sets to try when the config names none.
        #[arg(long, value_enum, default_value = "all")]
        targets: TargetsArg,
        /// Use one more than the largest target order as the size bound.
        #[arg(long)]
        bound_above_target: bool,
        /// Prefix length for the infinite families.
        #[arg(long, default_value_t = 20)]
        length: usize,
    },
    /// List every formula graph up to an order.
    Enumerate {
        #[arg(long)]
        alphabet: PathBuf,
        #[arg(long)]
        max_order: usize,
        #[arg(long)]
        include_equalities: bool,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "sessions")]
        state_dir: PathBuf,
    },
    /// Re-validate a transcript against its own config.
    Replay { file: PathBuf },
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn print_table(r: &VerificationReport) {
    eprintln!("{:<28} {:>12} {:>9} {:>9}", "suite", "instances", "failures", "ms");
    eprintln!("{:<28} {:>12} {:>9} {:>9}", r.suite, r.instances, r.failures.len(), r.wall_time_ms);
    for n in &r.notes {
        eprintln!("  {n}");
    }
    for f in &r.failures {
        eprintln!("  FAIL {}: {}", f.instance, f.detail);
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, protocol, mode, bound, target, fuel, seed, presenter, feedback } => {
            let opts = SimulateOptions { config, protocol, mode, bound, target, fuel, seed, presenter, feedback };
            let sim = commands::simulate(&opts)?;
            print_json(&sim.transcript)?;
            if let Some(t) = &sim.transcript.terminal {
                eprintln!("{} after {} moves ({})", t.status, sim.transcript.turns.len(), t.reason);
            }
            if let Some(c) = &sim.convergence {
                eprintln!("convergence: {}", serde_json::to_string(c)?);
            }
        }
        Command::Verify { suite, config, protocol, mode, bound, fuel, targets, bound_above_target, length } => {
            let opts = VerifyOptions {
                suite: match suite {
                    SuiteArg::Halting => Suite::Halting,
                    SuiteArg::Convergence => Suite::Convergence,
                    SuiteArg::Counterexamples => Suite::Counterexamples,
                },
                config,
                protocol,
                mode,
                bound,
                fuel,
                targets: match targets {
                    TargetsArg::All => TargetSelection::AllSubsets,
                    TargetsArg::Singletons => TargetSelection::Singletons,
                },
                bound_above_target,
                length,
            };
            let r = commands::verify(&opts)?;
            print_json(&r)?;
            print_table(&r);
            if !r.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Enumerate { alphabet, max_order, include_equalities } => {
            let graphs = commands::enumerate(&alphabet, max_order, include_equalities)?;
            eprintln!("{} classes", graphs.len());
            print_json(&graphs)?;
        }
        Command::Serve { port, state_dir } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(ufbd_cli::http::serve(port, &state_dir))?;
        }
        Command::Replay { file } => {
            let r = commands::replay(&file)?;
            print_json(&r)?;
            if !r.terminal_matches {
                eprintln!("the recorded terminal notice disagrees with the replay");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
