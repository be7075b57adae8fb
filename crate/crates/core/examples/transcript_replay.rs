// Record a run, replay it from the transcript, and show that the
// classical messages are load-bearing.

use std::error::Error;

use ghznet::locc::{Event, NetworkState};
use ghznet::protocols::{protocol_two, setup_tree, ProtocolTwoOptions};
use ghznet::topology::SpanningTree;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let tree = SpanningTree::from_edges(4, &[(1, 2), (2, 3), (2, 4)])?;
    let mut net = NetworkState::seeded(4, 21);
    setup_tree(&mut net, &tree)?;
    let run = protocol_two(&mut net, &tree, &ProtocolTwoOptions::default())?;
    let transcript = net.transcript().clone();
    println!(
        "{} events, {} cbits, outcomes {:?}",
        transcript.events().len(),
        transcript.cbits(),
        run.outcomes
    );

    let again = NetworkState::replay(4, &transcript)?;
    assert_eq!(again.transcript(), &transcript);
    println!("replay reproduced the transcript");

    let silent = transcript.filtered(|e| !matches!(e, Event::Message { .. }));
    match NetworkState::replay(4, &silent) {
        Err(e) => println!("without messages: {e}"),
        Ok(_) => panic!("replay without messages should fail"),
    }
    Ok(())
}

fn main() {
    run_example().expect("replay example failed");
}
