// Three-party GHZ state from two EPR pairs held by a common agent.

use std::error::Error;

use ghznet::locc::{BranchControl, NetworkState};
use ghznet::protocols::{protocol_one, run_protocol_one, BranchMode, CorrectionRule};
use ghznet::topology::AgentId;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (a, b, c) = (AgentId(1), AgentId(2), AgentId(3));
    let rule = CorrectionRule::from_cycle([a, b, c], a)?;
    println!(
        "sharer {}, X on {}, Z on {}",
        rule.sharer, rule.x_applier, rule.z_applier
    );

    // One branch with the intermediate states recorded.
    let mut net = NetworkState::new(3, BranchControl::forced(vec![1, 1]));
    net.enable_trace();
    net.distribute_epr(a, b)?;
    net.distribute_epr(a, c)?;
    let run = protocol_one(&mut net, &rule)?;
    for (label, state) in net.trace() {
        println!(
            "{label}: {} live qubits, norm {:.12}",
            state.num_qubits(),
            state.norm_sqr()
        );
    }
    println!(
        "branch M2=1 M1=1: fidelity {:.12}, cbits {}",
        run.fidelity, run.cbits
    );

    let report = run_protocol_one(&rule, BranchMode::All, 0)?;
    for br in &report.branches {
        println!(
            "  outcomes {}  p={:.3}  F={:.12}",
            br.outcomes, br.probability, br.fidelity
        );
    }
    assert!(report.passes());
    assert_eq!(report.cbits, 2);
    Ok(())
}

fn main() {
    run_example().expect("Protocol I example failed");
}
