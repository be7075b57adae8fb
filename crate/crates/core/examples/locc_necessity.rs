// Why connectivity is required: local operations and messages never
// create entanglement across a cut that starts with none.

use std::collections::BTreeSet;
use std::error::Error;

use ghznet::locc::{CBit, ClassicalMessage, LoccError, NetworkState, Receivers};
use ghznet::protocols::{run_protocol_three, BranchMode, ProtocolError};
use ghznet::statevec::Gate;
use ghznet::topology::{AgentId, EntangledHypergraph, EprGraph};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let graph = EprGraph::from_edges(4, &[(1, 2), (3, 4)])?;
    if let Err(e) = graph.spanning_tree() {
        println!("EPR graph rejected: {e}");
    }
    let h = EntangledHypergraph::new(5, &[vec![1, 2, 3], vec![4, 5]])?;
    match run_protocol_three(&h, BranchMode::All, 0) {
        Err(ProtocolError::Topology(e)) => println!("hypergraph rejected: {e}"),
        other => panic!("expected a rejection, got {other:?}"),
    }

    // Try hard anyway: agents 2 and 3 both act and talk.
    let (a1, a2, a3, a4) = (AgentId(1), AgentId(2), AgentId(3), AgentId(4));
    let mut net = NetworkState::seeded(4, 1);
    let (_, q2) = net.distribute_epr(a1, a2)?;
    let (q3, q4) = net.distribute_epr(a3, a4)?;
    let side: BTreeSet<AgentId> = [a1, a2].into();
    net.local_gate(a2, Gate::h(q2))?;
    let (m, out) = net.local_measure(a2, q2)?;
    net.send_classical(ClassicalMessage::new(
        a2,
        Receivers::One(a3),
        vec![CBit::outcome(m, out.bit)],
        "hint",
    ))?;
    net.local_gate_if(a3, Gate::x(q3), m)?;
    println!(
        "entropy across {{1,2}} | {{3,4}}: {:.3e}",
        net.audit_cut(&side)?
    );

    // Agent 4 never heard the outcome, so it may not condition on it.
    let err = net.local_gate_if(a4, Gate::z(q4), m).unwrap_err();
    assert!(matches!(err, LoccError::Conditioning { .. }));
    println!("illegal step refused: {err}");
    Ok(())
}

fn main() {
    run_example().expect("necessity example failed");
}
