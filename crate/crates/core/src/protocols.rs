//! The three GHZ preparation protocols and their building blocks.
//!
//! Each `protocol_*` function runs a single measurement branch on a network
//! whose setup already matches the topology. The `run_protocol_*` drivers
//! build fresh networks, walk every branch (or a seeded sample of them) and
//! fold the results into a [`ProtocolReport`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::locc::{
    BranchControl, CBit, ClassicalMessage, Event, LoccError, NetworkState, Receivers, Transcript,
};
use crate::statevec::{Gate, QubitId, StateError, StateVector, FIDELITY_EPS};
use crate::topology::{AgentId, EntangledHypergraph, SpanningTree, TopologyError};

/// Exhaustive branch walks stop here and fall back to sampling.
pub const MAX_EXHAUSTIVE_BRANCHES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Locc(#[from] LoccError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("{0}")]
    WrongTopology(String),
    #[error("designated qubits keep {entropy:.3e} bits of entanglement with other qubits")]
    ResidualEntanglement { entropy: f64 },
    #[error("{keep} and {drop} are not perfectly correlated (mismatch probability {mismatch:e})")]
    NotCorrelated {
        keep: QubitId,
        drop: QubitId,
        mismatch: f64,
    },
    #[error("EPR pairs are reserved for the running protocol")]
    LinksReserved,
    #[error("expected one designated qubit for each of the {0} agents")]
    Designation(u32),
    #[error("branch outcome vectors disagree on classical cost ({0} vs {1} cbits)")]
    UnstableCost(usize, usize),
}

impl From<StateError> for ProtocolError {
    fn from(e: StateError) -> Self {
        ProtocolError::Locc(LoccError::State(e))
    }
}

pub type Result<T, E = ProtocolError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProtocolKind {
    I,
    II,
    III,
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProtocolKind::I => "I",
            ProtocolKind::II => "II",
            ProtocolKind::III => "III",
        };
        f.write_str(s)
    }
}

/// Circuit used for the initial three-party GHZ state of Protocol II.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Step2Variant {
    /// The two-cbit symmetric circuit of Protocol I.
    #[default]
    Symmetric,
    /// One-cbit fusion at S.
    Zeilinger,
}

/// Order in which simultaneously ready vertices run their traversal step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Step3Order {
    #[default]
    Ascending,
    Descending,
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProtocolTwoOptions {
    pub step2: Step2Variant,
    pub order: Step3Order,
}

/// Who corrects what in the symmetric circuit: along the cyclic order
/// sharer → X-applier → Z-applier → sharer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorrectionRule {
    pub sharer: AgentId,
    pub x_applier: AgentId,
    pub z_applier: AgentId,
}

impl CorrectionRule {
    /// Rotate `cycle` so that `sharer` comes first.
    pub fn from_cycle(cycle: [AgentId; 3], sharer: AgentId) -> Result<Self> {
        let at = cycle.iter().position(|&a| a == sharer).ok_or_else(|| {
            ProtocolError::WrongTopology(format!("{sharer} is not part of the cyclic order"))
        })?;
        let rule = Self {
            sharer,
            x_applier: cycle[(at + 1) % 3],
            z_applier: cycle[(at + 2) % 3],
        };
        if rule.x_applier == rule.sharer
            || rule.z_applier == rule.sharer
            || rule.x_applier == rule.z_applier
        {
            return Err(ProtocolError::WrongTopology(
                "cyclic order must name three distinct agents".into(),
            ));
        }
        Ok(rule)
    }
}

/// Result of one branch of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchRun {
    pub outcomes: Vec<u8>,
    pub probability: f64,
    pub fidelity: f64,
    pub cbits: usize,
    pub epr_consumed: usize,
    pub designated: BTreeMap<AgentId, QubitId>,
    /// `(|F| + |E_i| - |F ∩ E_i|, simulated size)` after each fusion.
    pub merge_sizes: Vec<(usize, usize)>,
    pub duplicates_verified: usize,
    pub peak_register: usize,
    /// Every designated qubit is maximally mixed on its own.
    pub marginals_maximal: bool,
}

impl BranchRun {
    fn collect(
        net: &NetworkState,
        designated: BTreeMap<AgentId, QubitId>,
        fidelity: f64,
    ) -> Result<Self> {
        let mut outcomes = Vec::new();
        let mut probability = 1.0;
        for e in net.transcript().events() {
            if let Event::Measure {
                bit,
                probability: p,
                ..
            } = e
            {
                outcomes.push(*bit);
                probability *= p;
            }
        }
        Ok(Self {
            outcomes,
            probability,
            fidelity,
            cbits: net.cbits(),
            epr_consumed: net.consumed_links(),
            merge_sizes: Vec::new(),
            duplicates_verified: 0,
            peak_register: net.peak_register(),
            marginals_maximal: marginals_maximal(net, &designated)?,
            designated,
        })
    }
}

fn marginals_maximal(net: &NetworkState, designated: &BTreeMap<AgentId, QubitId>) -> Result<bool> {
    for &q in designated.values() {
        let rho = net.joint_state(&[q])?.reduced_qubit(q)?;
        let off = (rho[0][0].re - 0.5)
            .abs()
            .max((rho[1][1].re - 0.5).abs())
            .max(rho[0][1].norm());
        if off > FIDELITY_EPS {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fidelity of the designated qubits with the n-party GHZ state, plus the
/// entanglement they still share with every other live qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhzCheck {
    pub fidelity: f64,
    pub residual_entropy: f64,
}

impl GhzCheck {
    /// The fidelity, provided no other qubit is still entangled with the target.
    pub fn strict(self) -> Result<f64> {
        if self.residual_entropy > FIDELITY_EPS {
            Err(ProtocolError::ResidualEntanglement {
                entropy: self.residual_entropy,
            })
        } else {
            Ok(self.fidelity)
        }
    }
}

/// Compare the designated qubits (one per agent) with `(|0…0⟩ + |1…1⟩)/√2`.
pub fn verify_ghz(net: &NetworkState, designated: &BTreeMap<AgentId, QubitId>) -> Result<GhzCheck> {
    let n = net.n();
    let complete = designated.len() == n as usize
        && (1..=n).all(|a| designated.contains_key(&AgentId(a)))
        && designated.iter().all(|(&a, &q)| net.owner(q) == Some(a));
    if !complete {
        return Err(ProtocolError::Designation(n));
    }
    let qubits: Vec<QubitId> = designated.values().copied().collect();
    let joint = net.joint_state(&qubits)?;
    let target = StateVector::ghz(&qubits)?;
    let fidelity = joint.subsystem_fidelity(&target)?;
    let residual_entropy = if joint.num_qubits() > qubits.len() {
        joint.cut_entropy(&qubits.iter().copied().collect())?
    } else {
        0.0
    };
    Ok(GhzCheck {
        fidelity,
        residual_entropy,
    })
}

fn send_bit(
    net: &mut NetworkState,
    from: AgentId,
    to: Receivers,
    bit: CBit,
    purpose: &str,
) -> Result<()> {
    net.send_classical(ClassicalMessage::new(from, to, vec![bit], purpose))?;
    Ok(())
}

/// The symmetric two-cbit circuit: turns EPR pairs `(a1, b)` and `(a2, c)`
/// into a GHZ state on `(a1, b, c)`. Checkpoints are labelled `phi1`..`phi7`.
fn symmetric_ghz(
    net: &mut NetworkState,
    rule: &CorrectionRule,
    a1: QubitId,
    b: QubitId,
    a2: QubitId,
    c: QubitId,
) -> Result<()> {
    let a = rule.sharer;
    let a3 = net.ancilla(a)?;
    net.local_gate(a, Gate::cnot(a1, a3))?;
    net.checkpoint("phi1")?;
    net.local_gate(a, Gate::cnot(a3, a2))?;
    net.checkpoint("phi2")?;
    let (m2, o2) = net.local_measure(a, a2)?;
    net.checkpoint("phi3")?;
    net.local_gate(a, Gate::h(a3))?;
    net.checkpoint("phi4")?;
    let (m1, o1) = net.local_measure(a, a3)?;
    net.checkpoint("phi5")?;
    net.local_gate_if(a, Gate::x(a1), m2)?;
    send_bit(
        net,
        a,
        Receivers::One(rule.x_applier),
        CBit::outcome(m2, o2.bit),
        "M2",
    )?;
    send_bit(
        net,
        a,
        Receivers::One(rule.z_applier),
        CBit::outcome(m1, o1.bit),
        "M1",
    )?;
    net.local_gate_if(rule.x_applier, Gate::x(b), m2)?;
    net.checkpoint("phi6")?;
    net.local_gate_if(rule.z_applier, Gate::z(c), m1)?;
    net.checkpoint("phi7")?;
    net.discard(a, a2)?;
    net.discard(a, a3)?;
    Ok(())
}

/// Protocol I on the three-agent setup where the sharer holds EPR pairs with
/// both other agents. Two cbits; every agent acts.
pub fn protocol_one(net: &mut NetworkState, rule: &CorrectionRule) -> Result<BranchRun> {
    if net.n() != 3 {
        return Err(ProtocolError::WrongTopology(format!(
            "Protocol I needs exactly 3 agents, got {}",
            net.n()
        )));
    }
    let unused: BTreeSet<(AgentId, AgentId)> = net
        .links()
        .iter()
        .filter(|l| !l.consumed)
        .map(|l| (l.a.min(l.b), l.a.max(l.b)))
        .collect();
    let pair = |x: AgentId, y: AgentId| (x.min(y), x.max(y));
    let want: BTreeSet<_> = [
        pair(rule.sharer, rule.x_applier),
        pair(rule.sharer, rule.z_applier),
    ]
    .into();
    if unused != want || net.links().len() != 2 {
        return Err(ProtocolError::WrongTopology(format!(
            "Protocol I needs EPR pairs exactly between {} and each of {} and {}",
            rule.sharer, rule.x_applier, rule.z_applier
        )));
    }
    let (a1, b) = net.consume_link(rule.sharer, rule.x_applier)?;
    let (a2, c) = net.consume_link(rule.sharer, rule.z_applier)?;
    symmetric_ghz(net, rule, a1, b, a2, c)?;
    let designated: BTreeMap<AgentId, QubitId> =
        [(rule.sharer, a1), (rule.x_applier, b), (rule.z_applier, c)].into();
    let fidelity = verify_ghz(net, &designated)?.strict()?;
    BranchRun::collect(net, designated, fidelity)
}

/// Entangle a fresh `|0⟩` qubit of `actor` with `anchor` by a local CNOT.
pub fn extend_ghz(net: &mut NetworkState, actor: AgentId, anchor: QubitId) -> Result<QubitId> {
    if net.owner(anchor) != Some(actor) {
        return Err(LoccError::NotOwner {
            actor,
            qubit: anchor,
        }
        .into());
    }
    let e = net.ancilla(actor)?;
    net.local_gate(actor, Gate::cnot(anchor, e))?;
    Ok(e)
}

/// Teleport `payload` from `sender` to `receiver` over an unused EPR pair.
/// Returns the receiver's qubit, which now carries the payload state.
pub fn teleport(
    net: &mut NetworkState,
    sender: AgentId,
    payload: QubitId,
    receiver: AgentId,
) -> Result<QubitId> {
    if net.links_reserved() {
        return Err(ProtocolError::LinksReserved);
    }
    teleport_unchecked(net, sender, payload, receiver)
}

fn teleport_unchecked(
    net: &mut NetworkState,
    sender: AgentId,
    payload: QubitId,
    receiver: AgentId,
) -> Result<QubitId> {
    if net.owner(payload) != Some(sender) {
        return Err(LoccError::NotOwner {
            actor: sender,
            qubit: payload,
        }
        .into());
    }
    let (half, target) = net.consume_link(sender, receiver)?;
    net.local_gate(sender, Gate::cnot(payload, half))?;
    net.local_gate(sender, Gate::h(payload))?;
    let (m2, o2) = net.local_measure(sender, half)?;
    let (m1, o1) = net.local_measure(sender, payload)?;
    send_bit(
        net,
        sender,
        Receivers::One(receiver),
        CBit::outcome(m2, o2.bit),
        "teleport M2",
    )?;
    send_bit(
        net,
        sender,
        Receivers::One(receiver),
        CBit::outcome(m1, o1.bit),
        "teleport M1",
    )?;
    net.local_gate_if(receiver, Gate::x(target), m2)?;
    net.local_gate_if(receiver, Gate::z(target), m1)?;
    net.discard(sender, half)?;
    net.discard(sender, payload)?;
    Ok(target)
}

fn owned_in(net: &NetworkState, qubits: &[QubitId], agent: AgentId) -> Option<QubitId> {
    qubits
        .iter()
        .copied()
        .find(|&q| net.owner(q) == Some(agent))
}

/// Merge two GHZ-form groups through `junction`: CNOT from its F qubit onto
/// its E qubit, measure the E qubit, broadcast the bit, and let every other E
/// holder flip on 1. The merged group has `|F| + |E| - 1` qubits.
pub fn fusion_step(
    net: &mut NetworkState,
    f_qubits: &[QubitId],
    e_qubits: &[QubitId],
    junction: AgentId,
) -> Result<u8> {
    let missing =
        || ProtocolError::WrongTopology(format!("{junction} must hold a qubit in both groups"));
    let qf = owned_in(net, f_qubits, junction).ok_or_else(missing)?;
    let qe = owned_in(net, e_qubits, junction).ok_or_else(missing)?;
    net.local_gate(junction, Gate::cnot(qf, qe))?;
    let (m, o) = net.local_measure(junction, qe)?;
    // broadcast even when 0, so the cost does not depend on the outcome
    send_bit(
        net,
        junction,
        Receivers::All,
        CBit::outcome(m, o.bit),
        "fusion",
    )?;
    for &q in e_qubits {
        if q == qe {
            continue;
        }
        let holder = net.owner(q).ok_or(LoccError::UnknownQubit(q))?;
        net.local_gate_if(holder, Gate::x(q), m)?;
    }
    net.discard(junction, qe)?;
    Ok(o.bit)
}

/// Undo a duplicate: CNOT `keep → drop` leaves `drop` in `|0⟩`, which is
/// checked and then discarded. No communication.
pub fn disentangle_duplicate(
    net: &mut NetworkState,
    actor: AgentId,
    keep: QubitId,
    drop: QubitId,
) -> Result<()> {
    for q in [keep, drop] {
        if net.owner(q) != Some(actor) {
            return Err(LoccError::NotOwner { actor, qubit: q }.into());
        }
    }
    let mismatch = net
        .joint_state(&[keep, drop])?
        .parity_probability(keep, drop)?;
    if mismatch > FIDELITY_EPS {
        return Err(ProtocolError::NotCorrelated {
            keep,
            drop,
            mismatch,
        });
    }
    net.local_gate(actor, Gate::cnot(keep, drop))?;
    let p0 = net.joint_state(&[drop])?.probability(drop, 0)?;
    if p0 < 1.0 - FIDELITY_EPS {
        return Err(ProtocolError::NotCorrelated {
            keep,
            drop,
            mismatch: 1.0 - p0,
        });
    }
    net.discard(actor, drop)?;
    Ok(())
}

/// Distribute one EPR pair per tree edge.
pub fn setup_tree(net: &mut NetworkState, tree: &SpanningTree) -> Result<()> {
    for &(a, b) in tree.edges() {
        net.distribute_epr(a, b)?;
    }
    Ok(())
}

/// Distribute one GHZ-form state per hyperedge, in sorted order.
pub fn setup_hypergraph(net: &mut NetworkState, h: &EntangledHypergraph) -> Result<()> {
    for e in h.hyperedges() {
        net.distribute_ghz(&e.members)?;
    }
    Ok(())
}

/// Protocol II along a spanning EPR tree. Costs `2n + k - 4` cbits with the
/// symmetric Step 2 and one fewer with the fusion variant.
pub fn protocol_two(
    net: &mut NetworkState,
    tree: &SpanningTree,
    opts: &ProtocolTwoOptions,
) -> Result<BranchRun> {
    let n = tree.n();
    let links: BTreeSet<(AgentId, AgentId)> = net
        .links()
        .iter()
        .map(|l| (l.a.min(l.b), l.a.max(l.b)))
        .collect();
    let tree_edges: BTreeSet<(AgentId, AgentId)> = tree.edges().iter().copied().collect();
    if net.n() != n
        || links != tree_edges
        || net.links().len() != tree_edges.len()
        || net.is_started()
    {
        return Err(ProtocolError::WrongTopology(
            "network setup must be exactly one unused EPR pair per tree edge".into(),
        ));
    }
    let s = tree.start();
    let t = tree.root_leaf();

    // Step 1: S announces the run; the pairs are now reserved for it.
    send_bit(net, s, Receivers::All, CBit::signal(1), "start")?;
    net.reserve_links(s)?;

    let mut designated = BTreeMap::new();
    if n == 2 {
        let (qs, qt) = net.consume_link(s, t)?;
        designated.insert(s, qs);
        designated.insert(t, qt);
        let fidelity = verify_ghz(net, &designated)?.strict()?;
        return BranchRun::collect(net, designated, fidelity);
    }

    // Step 2: GHZ on S, T and the lowest-index other neighbour R of S.
    let r = tree
        .neighbors(s)
        .into_iter()
        .find(|&x| x != t)
        .expect("S has a second neighbour when n >= 3");
    let (a1, b) = net.consume_link(s, t)?;
    let (a2, c) = net.consume_link(s, r)?;
    match opts.step2 {
        Step2Variant::Symmetric => {
            let rule = CorrectionRule {
                sharer: s,
                x_applier: t,
                z_applier: r,
            };
            symmetric_ghz(net, &rule, a1, b, a2, c)?;
        }
        Step2Variant::Zeilinger => {
            fusion_step(net, &[a1, b], &[a2, c], s)?;
        }
    }
    designated.insert(s, a1);
    designated.insert(t, b);
    designated.insert(r, c);

    // Step 3: each newly entangled vertex extends the state to its
    // unentangled neighbours by teleportation; leaves other than T report.
    let mut ready: Vec<AgentId> = vec![s, r];
    let mut shuffle_rng = match opts.order {
        Step3Order::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    while !ready.is_empty() {
        ready.sort();
        let pick = match opts.order {
            Step3Order::Ascending => 0,
            Step3Order::Descending => ready.len() - 1,
            Step3Order::Shuffled(_) => {
                let idx: Vec<usize> = (0..ready.len()).collect();
                *idx.choose(shuffle_rng.as_mut().expect("seeded"))
                    .expect("nonempty")
            }
        };
        let agent = ready.remove(pick);
        if tree.leaves().contains(&agent) {
            if agent != t {
                send_bit(net, agent, Receivers::All, CBit::signal(1), "entangled")?;
            }
            continue;
        }
        for k in tree.neighbors(agent) {
            if designated.contains_key(&k) {
                continue;
            }
            let extra = extend_ghz(net, agent, designated[&agent])?;
            let q = teleport_unchecked(net, agent, extra, k)?;
            designated.insert(k, q);
            ready.push(k);
        }
    }

    let fidelity = verify_ghz(net, &designated)?.strict()?;
    BranchRun::collect(net, designated, fidelity)
}

/// Protocol III over an entangled hypergraph: fuse hyperedges into the
/// growing set `F` and strip duplicate qubits of agents already in `F`.
pub fn protocol_three(net: &mut NetworkState, h: &EntangledHypergraph) -> Result<BranchRun> {
    // Reject before touching the network.
    h.require_connected()?;
    let schedule = h.merge_schedule()?;
    if net.n() != h.n() || net.is_started() {
        return Err(ProtocolError::WrongTopology(
            "network must be a fresh setup over the same agents".into(),
        ));
    }
    let groups: Vec<BTreeMap<AgentId, QubitId>> = h
        .hyperedges()
        .iter()
        .map(|e| {
            net.groups()
                .iter()
                .find(|g| g.keys().eq(e.members.iter()))
                .cloned()
                .ok_or_else(|| {
                    ProtocolError::WrongTopology(format!(
                        "no shared state for hyperedge #{}",
                        e.index
                    ))
                })
        })
        .collect::<Result<_>>()?;
    if groups.len() != net.groups().len() {
        return Err(ProtocolError::WrongTopology(
            "network holds shared states outside the hypergraph".into(),
        ));
    }

    let mut designated = groups[0].clone();
    let mut merge_sizes = Vec::with_capacity(schedule.len());
    let mut duplicates = 0;
    for step in &schedule {
        let group = &groups[step.hyperedge];
        let f_qubits: Vec<QubitId> = designated.values().copied().collect();
        let e_qubits: Vec<QubitId> = group.values().copied().collect();
        fusion_step(net, &f_qubits, &e_qubits, step.junction)?;
        for &a in step.overlap.iter().filter(|&&a| a != step.junction) {
            disentangle_duplicate(net, a, designated[&a], group[&a])?;
            duplicates += 1;
        }
        for &a in step.members.difference(&step.overlap) {
            designated.insert(a, group[&a]);
        }
        let qubits: Vec<QubitId> = designated.values().copied().collect();
        let simulated = net.joint_state(&qubits)?.num_qubits();
        merge_sizes.push((step.post_size(), simulated));
    }
    for i in h.redundant_hyperedges(&schedule) {
        let qubits: Vec<QubitId> = groups[i].values().copied().collect();
        net.release(&qubits)?;
    }

    let fidelity = verify_ghz(net, &designated)?.strict()?;
    let mut run = BranchRun::collect(net, designated, fidelity)?;
    run.merge_sizes = merge_sizes;
    run.duplicates_verified = duplicates;
    Ok(run)
}

/// Which branches a driver explores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchMode {
    /// Every nonzero-probability outcome vector, depth first.
    All,
    /// This many runs drawn from one seeded stream.
    Sample(usize),
}

/// Run `f` once per branch. `f` receives the outcome controller for a fresh
/// network and hands it back together with the branch result.
pub fn explore_branches<F>(
    mode: BranchMode,
    seed: u64,
    mut f: F,
) -> Result<(Vec<(BranchRun, Transcript)>, bool)>
where
    F: FnMut(BranchControl) -> Result<(BranchRun, Transcript, BranchControl)>,
{
    let mut out = Vec::new();
    match mode {
        BranchMode::All => {
            let mut prefix = Some(Vec::new());
            while let Some(p) = prefix {
                if out.len() == MAX_EXHAUSTIVE_BRANCHES {
                    return explore_branches(BranchMode::Sample(MAX_EXHAUSTIVE_BRANCHES), seed, f)
                        .map(|(runs, _)| (runs, false));
                }
                let (run, transcript, control) = f(BranchControl::forced(p))?;
                prefix = match control {
                    BranchControl::Scripted(script) => script.next_prefix(),
                    BranchControl::Sampled(_) => None,
                };
                out.push((run, transcript));
            }
            Ok((out, true))
        }
        BranchMode::Sample(count) => {
            let mut control = BranchControl::seeded(seed);
            for _ in 0..count {
                let (run, transcript, back) = f(control)?;
                control = back;
                out.push((run, transcript));
            }
            Ok((out, false))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchSummary {
    /// Measurement outcomes in execution order, e.g. `"0110"`.
    pub outcomes: String,
    pub probability: f64,
    pub fidelity: f64,
    pub cbits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub protocol: ProtocolKind,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step2: Option<Step2Variant>,
    pub cbits: usize,
    pub expected_cbits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cbit_bound: Option<usize>,
    pub epr_consumed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_steps: Option<usize>,
    pub exhaustive: bool,
    pub branch_count: usize,
    pub probability_mass: f64,
    pub worst_fidelity: f64,
    pub identities_hold: bool,
    pub branches: Vec<BranchSummary>,
    /// Transcript of the first explored branch.
    pub transcript: Transcript,
}

impl ProtocolReport {
    /// All identities hold and every branch reached the GHZ state.
    pub fn passes(&self) -> bool {
        self.identities_hold && self.worst_fidelity >= 1.0 - FIDELITY_EPS
    }
}

struct Folded {
    cbits: usize,
    marginals: bool,
    worst: f64,
    mass: f64,
    epr: usize,
    branches: Vec<BranchSummary>,
    first: Transcript,
}

fn fold(runs: Vec<(BranchRun, Transcript)>) -> Result<Folded> {
    let first_cbits = runs.first().map_or(0, |r| r.0.cbits);
    let first_epr = runs.first().map_or(0, |r| r.0.epr_consumed);
    let mut worst = f64::INFINITY;
    let mut mass = 0.0;
    let mut branches = Vec::with_capacity(runs.len());
    let mut first = None;
    let mut marginals = true;
    for (run, transcript) in runs {
        marginals &= run.marginals_maximal;
        if run.cbits != first_cbits {
            return Err(ProtocolError::UnstableCost(first_cbits, run.cbits));
        }
        worst = worst.min(run.fidelity);
        mass += run.probability;
        branches.push(BranchSummary {
            outcomes: run.outcomes.iter().map(|b| char::from(b'0' + b)).collect(),
            probability: run.probability,
            fidelity: run.fidelity,
            cbits: run.cbits,
        });
        first.get_or_insert(transcript);
    }
    Ok(Folded {
        cbits: first_cbits,
        marginals,
        worst,
        mass,
        epr: first_epr,
        branches,
        first: first.unwrap_or_default(),
    })
}

/// Protocol I over every branch of the three-agent setup described by `rule`.
pub fn run_protocol_one(
    rule: &CorrectionRule,
    mode: BranchMode,
    seed: u64,
) -> Result<ProtocolReport> {
    let (runs, exhaustive) = explore_branches(mode, seed, |control| {
        let mut net = NetworkState::new(3, control);
        net.distribute_epr(rule.sharer, rule.x_applier)?;
        net.distribute_epr(rule.sharer, rule.z_applier)?;
        let run = protocol_one(&mut net, rule)?;
        let (transcript, control) = net.into_parts();
        Ok((run, transcript, control))
    })?;
    let f = fold(runs)?;
    Ok(ProtocolReport {
        protocol: ProtocolKind::I,
        n: 3,
        k: None,
        step2: None,
        cbits: f.cbits,
        expected_cbits: 2,
        cbit_bound: None,
        epr_consumed: f.epr,
        merge_steps: None,
        exhaustive,
        branch_count: f.branches.len(),
        probability_mass: f.mass,
        worst_fidelity: f.worst,
        identities_hold: f.cbits == 2 && f.epr == 2 && f.marginals,
        branches: f.branches,
        transcript: f.first,
    })
}

/// Expected Protocol II cost; `n = 2` only pays the start signal.
pub fn protocol_two_cbits(n: u32, k: usize, step2: Step2Variant) -> usize {
    if n == 2 {
        return 1;
    }
    let base = 2 * n as usize + k - 4;
    match step2 {
        Step2Variant::Symmetric => base,
        Step2Variant::Zeilinger => base - 1,
    }
}

pub fn run_protocol_two(
    tree: &SpanningTree,
    opts: &ProtocolTwoOptions,
    mode: BranchMode,
    seed: u64,
) -> Result<ProtocolReport> {
    let n = tree.n();
    let (runs, exhaustive) = explore_branches(mode, seed, |control| {
        let mut net = NetworkState::new(n, control);
        setup_tree(&mut net, tree)?;
        let run = protocol_two(&mut net, tree, opts)?;
        let (transcript, control) = net.into_parts();
        Ok((run, transcript, control))
    })?;
    let f = fold(runs)?;
    let expected = protocol_two_cbits(n, tree.k(), opts.step2);
    let bound = (n >= 3).then(|| 3 * n as usize - 5);
    let identities_hold = f.cbits == expected
        && bound.is_none_or(|b| f.cbits <= b)
        && f.epr == n as usize - 1
        && f.marginals;
    Ok(ProtocolReport {
        protocol: ProtocolKind::II,
        n,
        k: Some(tree.k()),
        step2: Some(opts.step2),
        cbits: f.cbits,
        expected_cbits: expected,
        cbit_bound: bound,
        epr_consumed: f.epr,
        merge_steps: None,
        exhaustive,
        branch_count: f.branches.len(),
        probability_mass: f.mass,
        worst_fidelity: f.worst,
        identities_hold,
        branches: f.branches,
        transcript: f.first,
    })
}

pub fn run_protocol_three(
    h: &EntangledHypergraph,
    mode: BranchMode,
    seed: u64,
) -> Result<ProtocolReport> {
    h.require_connected()?;
    let steps = h.merge_schedule()?.len();
    let mut sizes_ok = true;
    let (runs, exhaustive) = explore_branches(mode, seed, |control| {
        let mut net = NetworkState::new(h.n(), control);
        setup_hypergraph(&mut net, h)?;
        let run = protocol_three(&mut net, h)?;
        sizes_ok &= run.merge_sizes.iter().all(|(want, got)| want == got);
        let (transcript, control) = net.into_parts();
        Ok((run, transcript, control))
    })?;
    let f = fold(runs)?;
    Ok(ProtocolReport {
        protocol: ProtocolKind::III,
        n: h.n(),
        k: None,
        step2: None,
        cbits: f.cbits,
        expected_cbits: steps,
        cbit_bound: None,
        epr_consumed: 0,
        merge_steps: Some(steps),
        exhaustive,
        branch_count: f.branches.len(),
        probability_mass: f.mass,
        worst_fidelity: f.worst,
        identities_hold: f.cbits == steps && sizes_ok && f.marginals,
        branches: f.branches,
        transcript: f.first,
    })
}
