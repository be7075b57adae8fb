// Fuse GHZ states shared by overlapping groups into one n-party state.

use std::error::Error;

use ghznet::locc::NetworkState;
use ghznet::protocols::{protocol_three, run_protocol_three, setup_hypergraph, BranchMode};
use ghznet::topology::EntangledHypergraph;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let h = EntangledHypergraph::new(
        7,
        &[
            vec![1, 2, 3],
            vec![3, 4],
            vec![2, 3, 5, 6],
            vec![6, 7],
            vec![4, 5],
        ],
    )?;
    for step in h.merge_schedule()? {
        println!(
            "fuse {:?} at {} (overlap {}), |F| {} -> {}",
            step.members,
            step.junction,
            step.overlap.len(),
            step.pre_size,
            step.post_size()
        );
    }
    println!(
        "contained, released unused: {:?}",
        h.redundant_hyperedges(&h.merge_schedule()?)
    );

    let mut net = NetworkState::seeded(h.n(), 5);
    setup_hypergraph(&mut net, &h)?;
    let run = protocol_three(&mut net, &h)?;
    println!(
        "one branch: F {:.12}, cbits {}, duplicates removed {}, sizes {:?}",
        run.fidelity, run.cbits, run.duplicates_verified, run.merge_sizes
    );

    let report = run_protocol_three(&h, BranchMode::All, 0)?;
    println!(
        "{} branches, worst F {:.12}",
        report.branch_count, report.worst_fidelity
    );
    assert!(report.passes());
    Ok(())
}

fn main() {
    run_example().expect("Protocol III example failed");
}
