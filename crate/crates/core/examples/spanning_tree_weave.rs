// n-party GHZ over an EPR graph by weaving along a spanning tree.

use std::error::Error;

use ghznet::protocols::{
    run_protocol_two, BranchMode, ProtocolTwoOptions, Step2Variant, Step3Order,
};
use ghznet::topology::EprGraph;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let graph = EprGraph::from_edges(6, &[(1, 2), (2, 3), (2, 4), (3, 4), (4, 5), (5, 6), (1, 6)])?;
    let tree = graph.spanning_tree()?;
    println!("tree {:?}", tree.edges());
    println!(
        "T = {}, S = {}, k = {}",
        tree.root_leaf(),
        tree.start(),
        tree.k()
    );

    for step2 in [Step2Variant::Symmetric, Step2Variant::Zeilinger] {
        for order in [
            Step3Order::Ascending,
            Step3Order::Descending,
            Step3Order::Shuffled(3),
        ] {
            let opts = ProtocolTwoOptions { step2, order };
            let report = run_protocol_two(&tree, &opts, BranchMode::Sample(16), 11)?;
            println!(
                "{step2:?}/{order:?}: cbits {} (expected {}), EPR used {}, worst F {:.12}",
                report.cbits, report.expected_cbits, report.epr_consumed, report.worst_fidelity
            );
            assert!(report.passes());
        }
    }
    Ok(())
}

fn main() {
    run_example().expect("Protocol II example failed");
}
