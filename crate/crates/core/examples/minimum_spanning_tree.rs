// Pick the cheapest spanning tree when EPR links carry resource weights.

use std::error::Error;

use ghznet::protocols::{run_protocol_two, BranchMode, ProtocolTwoOptions};
use ghznet::topology::EprGraph;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut graph = EprGraph::new(5)?;
    for (a, b, w) in [
        (1, 2, 4.0),
        (1, 3, 1.0),
        (2, 3, 2.0),
        (3, 4, 7.0),
        (2, 4, 3.0),
        (4, 5, 1.5),
        (3, 5, 6.0),
    ] {
        graph.add_weighted_edge(a, b, w)?;
    }
    let bfs = graph.spanning_tree()?;
    let mst = graph.minimum_spanning_tree()?;
    println!(
        "BFS tree {:?} weight {}",
        bfs.edges(),
        graph.tree_weight(&bfs)
    );
    println!(
        "MST      {:?} weight {}",
        mst.edges(),
        graph.tree_weight(&mst)
    );
    assert!(graph.tree_weight(&mst) <= graph.tree_weight(&bfs));

    let report = run_protocol_two(&mst, &ProtocolTwoOptions::default(), BranchMode::All, 0)?;
    println!(
        "{} branches, cbits {}, worst F {:.12}",
        report.branch_count, report.cbits, report.worst_fidelity
    );
    assert!(report.passes());
    Ok(())
}

fn main() {
    run_example().expect("MST example failed");
}
