// Teleport an arbitrary qubit and grow a GHZ state by one party.

use std::error::Error;

use ghznet::locc::{BranchControl, NetworkState};
use ghznet::protocols::{extend_ghz, teleport, verify_ghz};
use ghznet::statevec::{Gate, StateVector};
use ghznet::topology::AgentId;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (a, b, c) = (AgentId(1), AgentId(2), AgentId(3));

    // H then Z then H: |1⟩. Sent through all four outcome branches.
    for outcomes in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let mut net = NetworkState::new(2, BranchControl::forced(outcomes.to_vec()));
        net.distribute_epr(a, b)?;
        let q = net.ancilla(a)?;
        for g in [Gate::h(q), Gate::z(q), Gate::h(q)] {
            net.local_gate(a, g)?;
        }
        let out = teleport(&mut net, a, q, b)?;
        let want = StateVector::basis_state(&[out], &[1])?;
        let f = net.joint_state(&[out])?.fidelity(&want)?;
        println!(
            "outcomes {outcomes:?}: fidelity {f:.12}, cbits {}",
            net.cbits()
        );
    }

    // A GHZ pair between 1 and 2 reaches agent 3 through 2's EPR pair.
    let mut net = NetworkState::seeded(3, 4);
    let g = net.distribute_ghz(&[a, b].into())?;
    net.distribute_epr(b, c)?;
    let extra = extend_ghz(&mut net, b, g[&b])?;
    let q3 = teleport(&mut net, b, extra, c)?;
    let check = verify_ghz(&net, &[(a, g[&a]), (b, g[&b]), (c, q3)].into())?;
    println!(
        "GHZ3 fidelity {:.12}, residual entropy {:.1e}",
        check.fidelity, check.residual_entropy
    );
    check.strict()?;
    Ok(())
}

fn main() {
    run_example().expect("teleportation example failed");
}
