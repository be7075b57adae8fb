// Parse a network specification and produce the JSON run report.

use std::error::Error;

use ghznet::cli::{parse_spec, run, RunFlags, Subcommand};
use ghznet::protocols::BranchMode;

const SPEC: &str = "\
# a 5-agent line with a spur
agents 5
edge 1 2
edge 2 3
edge 3 4
edge 3 5
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = parse_spec(SPEC)?;
    print!("normalized:\n{spec}");
    let flags = RunFlags {
        seed: 7,
        branches: BranchMode::Sample(4),
        ..RunFlags::default()
    };
    for command in [Subcommand::Check, Subcommand::Tree, Subcommand::Weave] {
        let outcome = run(command, &spec, &flags);
        print!(
            "[{}] exit {}\n{}",
            command.name(),
            outcome.exit_code,
            outcome.text
        );
    }
    let json = run(Subcommand::Weave, &spec, &flags).report.to_json();
    println!(
        "report: {} bytes, first line {:?}",
        json.len(),
        json.lines().nth(1).unwrap_or("")
    );
    Ok(())
}

fn main() {
    run_example().expect("report example failed");
}
