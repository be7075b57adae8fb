use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ghznet::cli::{self, parse_branches, parse_order, RunFlags, Subcommand, EXIT_FAILURE};
use ghznet::protocols::{BranchMode, Step2Variant, Step3Order};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    /// Connectivity verdict for the EPR graph or hypergraph
    Check,
    /// Spanning EPR tree by breadth-first search
    Tree,
    /// Minimum-weight spanning EPR tree
    Mst,
    /// Three-party GHZ from two EPR pairs
    Ghz3,
    /// n-party GHZ along a spanning EPR tree
    Weave,
    /// n-party GHZ by fusing hyperedge states
    Fuse,
}

#[derive(Clone, Copy, ValueEnum)]
enum Step2 {
    Symmetric,
    Zeilinger,
}

#[derive(Parser)]
#[command(
    name = "ghznet",
    version,
    about = "GHZ state preparation over EPR networks"
)]
struct Args {
    command: Command,
    /// Network specification file
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `all` or `sample:<count>`
    #[arg(long, default_value = "all", value_parser = parse_branches)]
    branches: BranchMode,
    #[arg(long, value_enum, default_value = "symmetric")]
    step2: Step2,
    /// Step-3 order for `weave`: `ascending`, `descending` or `shuffled:<seed>`
    #[arg(long, default_value = "ascending", value_parser = parse_order)]
    order: Step3Order,
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let text = match std::fs::read_to_string(&args.spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.spec.display());
            return ExitCode::from(EXIT_FAILURE as u8);
        }
    };
    let spec = match cli::parse_spec(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.spec.display());
            return ExitCode::from(EXIT_FAILURE as u8);
        }
    };
    let command = match args.command {
        Command::Check => Subcommand::Check,
        Command::Tree => Subcommand::Tree,
        Command::Mst => Subcommand::Mst,
        Command::Ghz3 => Subcommand::Ghz3,
        Command::Weave => Subcommand::Weave,
        Command::Fuse => Subcommand::Fuse,
    };
    let flags = RunFlags {
        seed: args.seed,
        branches: args.branches,
        step2: match args.step2 {
            Step2::Symmetric => Step2Variant::Symmetric,
            Step2::Zeilinger => Step2Variant::Zeilinger,
        },
        order: args.order,
        verbose: args.verbose,
    };
    let outcome = cli::run(command, &spec, &flags);
    print!("{}", outcome.text);
    if let Some(path) = &args.report {
        if let Err(e) = std::fs::write(path, outcome.report.to_json()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_FAILURE as u8);
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
