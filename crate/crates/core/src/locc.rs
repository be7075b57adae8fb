//! The distributed network: agents own qubits, act only on what they own, and
//! coordinate through counted classical messages.
//!
//! The global state is kept as a list of independent factors. Two factors are
//! tensored together only when a single agent applies a gate across them, so
//! unused EPR pairs never enlarge the live register.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevec::{
    Choice, Gate, MeasurementOutcome, QubitId, StateError, StateVector, PROB_EPS,
};
use crate::topology::{agents, AgentId};

/// Handle to a recorded measurement result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Receivers {
    One(AgentId),
    All,
}

/// One transmitted bit, optionally tied to the measurement it reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CBit {
    pub value: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<OutcomeId>,
}

impl CBit {
    /// A free signalling bit chosen by the sender.
    pub fn signal(value: u8) -> Self {
        Self {
            value,
            source: None,
        }
    }

    pub fn outcome(id: OutcomeId, value: u8) -> Self {
        Self {
            value,
            source: Some(id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalMessage {
    pub sender: AgentId,
    pub receivers: Receivers,
    pub bits: Vec<CBit>,
    pub purpose: String,
}

impl ClassicalMessage {
    pub fn new(sender: AgentId, receivers: Receivers, bits: Vec<CBit>, purpose: &str) -> Self {
        Self {
            sender,
            receivers,
            bits,
            purpose: purpose.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Epr {
        a: AgentId,
        b: AgentId,
        qubits: [QubitId; 2],
    },
    Ghz {
        members: Vec<AgentId>,
        qubits: Vec<QubitId>,
    },
    Ancilla {
        actor: AgentId,
        qubit: QubitId,
    },
    /// Local preparation of `re0 + i·im0, re1 + i·im1`.
    Prepare {
        actor: AgentId,
        qubit: QubitId,
        amplitudes: [f64; 4],
    },
    Gate {
        actor: AgentId,
        gate: Gate,
        #[serde(skip_serializing_if = "Option::is_none")]
        condition: Option<OutcomeId>,
        applied: bool,
    },
    Measure {
        actor: AgentId,
        qubit: QubitId,
        outcome: OutcomeId,
        bit: u8,
        probability: f64,
    },
    Message(ClassicalMessage),
    Discard {
        actor: AgentId,
        qubit: QubitId,
    },
    Release {
        qubits: Vec<QubitId>,
    },
    Reserve {
        by: AgentId,
    },
}

/// Ordered record of every setup step, local operation and message of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn messages(&self) -> impl Iterator<Item = &ClassicalMessage> {
        self.events.iter().filter_map(|e| match e {
            Event::Message(m) => Some(m),
            _ => None,
        })
    }

    /// Total transmitted bits; a broadcast counts once.
    pub fn cbits(&self) -> usize {
        self.messages().map(|m| m.bits.len()).sum()
    }

    /// A copy without any of the events rejected by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Event) -> bool) -> Transcript {
        Transcript {
            events: self.events.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }
}

/// Forced prefix of measurement outcomes plus a record of what was taken.
#[derive(Clone, Debug, Default)]
pub struct BranchScript {
    forced: Vec<u8>,
    taken: Vec<u8>,
    alternatives: Vec<bool>,
}

impl BranchScript {
    pub fn new(forced: Vec<u8>) -> Self {
        Self {
            forced,
            ..Self::default()
        }
    }

    pub fn taken(&self) -> &[u8] {
        &self.taken
    }

    /// Next outcome vector in depth-first order, if any remain.
    pub fn next_prefix(&self) -> Option<Vec<u8>> {
        let last = (0..self.taken.len())
            .rev()
            .find(|&i| self.taken[i] == 0 && self.alternatives[i])?;
        let mut prefix = self.taken[..last].to_vec();
        prefix.push(1);
        Some(prefix)
    }
}

/// Chooses measurement outcomes: a seeded stream or a scripted branch walk.
#[derive(Clone, Debug)]
pub enum BranchControl {
    Sampled(Box<ChaCha8Rng>),
    Scripted(BranchScript),
}

impl BranchControl {
    pub fn seeded(seed: u64) -> Self {
        BranchControl::Sampled(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    pub fn forced(bits: Vec<u8>) -> Self {
        BranchControl::Scripted(BranchScript::new(bits))
    }

    fn choose(&mut self, p0: f64) -> Choice {
        match self {
            BranchControl::Sampled(rng) => Choice::Draw(rng.gen::<f64>()),
            BranchControl::Scripted(script) => {
                let at = script.taken.len();
                let p1 = 1.0 - p0;
                let bit = match script.forced.get(at) {
                    Some(&b) => b,
                    None if p0 > PROB_EPS => 0,
                    None => 1,
                };
                script.taken.push(bit);
                script.alternatives.push(bit == 0 && p1 > PROB_EPS);
                Choice::Forced(bit)
            }
        }
    }
}

/// A shared EPR pair and whether it has been used up.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EprLink {
    pub a: AgentId,
    pub b: AgentId,
    pub qubit_a: QubitId,
    pub qubit_b: QubitId,
    pub consumed: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoccError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("agent {agent} is outside 1..={n}")]
    UnknownAgent { agent: AgentId, n: u32 },
    #[error("setup is over; entanglement can no longer be distributed")]
    SetupOver,
    #[error("an EPR pair needs two distinct agents, got {0} twice")]
    SameAgent(AgentId),
    #[error("a shared GHZ state needs at least 2 members, got {0}")]
    GroupTooSmall(usize),
    #[error("LOCC violation: {actor} does not own {qubit}")]
    NotOwner { actor: AgentId, qubit: QubitId },
    #[error("{0} does not exist")]
    UnknownQubit(QubitId),
    #[error("classical message carries no bits")]
    EmptyMessage,
    #[error("conditioning violation: {agent} does not know outcome #{}", outcome.0)]
    Conditioning { agent: AgentId, outcome: OutcomeId },
    #[error("outcome #{} was {actual}, message claims {claimed}", outcome.0)]
    BitMismatch {
        outcome: OutcomeId,
        actual: u8,
        claimed: u8,
    },
    #[error("unknown outcome #{}", .0 .0)]
    UnknownOutcome(OutcomeId),
    #[error("no unused EPR pair between {0} and {1}")]
    NoLink(AgentId, AgentId),
    #[error("partition must be a nonempty proper subset of the agents")]
    ImproperPartition,
    #[error("qubits {0:?} are not an independent part of the network state")]
    NotIndependent(Vec<QubitId>),
}

pub type Result<T, E = LoccError> = std::result::Result<T, E>;

#[derive(Clone, Debug)]
pub struct NetworkState {
    n: u32,
    factors: Vec<StateVector>,
    owners: BTreeMap<QubitId, AgentId>,
    next_qubit: u32,
    started: bool,
    links: Vec<EprLink>,
    groups: Vec<BTreeMap<AgentId, QubitId>>,
    reserved: bool,
    transcript: Transcript,
    cbits: usize,
    outcomes: Vec<(AgentId, MeasurementOutcome)>,
    known: BTreeMap<AgentId, BTreeSet<OutcomeId>>,
    control: BranchControl,
    peak_register: usize,
    trace: Option<Vec<(String, StateVector)>>,
}

impl NetworkState {
    pub fn new(n: u32, control: BranchControl) -> Self {
        Self {
            n,
            factors: Vec::new(),
            owners: BTreeMap::new(),
            next_qubit: 0,
            started: false,
            links: Vec::new(),
            groups: Vec::new(),
            reserved: false,
            transcript: Transcript::default(),
            cbits: 0,
            outcomes: Vec::new(),
            known: BTreeMap::new(),
            control,
            peak_register: 0,
            trace: None,
        }
    }

    pub fn seeded(n: u32, seed: u64) -> Self {
        Self::new(n, BranchControl::seeded(seed))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cbits(&self) -> usize {
        self.cbits
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_parts(self) -> (Transcript, BranchControl) {
        (self.transcript, self.control)
    }

    pub fn control(&self) -> &BranchControl {
        &self.control
    }

    pub fn is_started(&self) -> bool {
        self.started
    }

    pub fn links(&self) -> &[EprLink] {
        &self.links
    }

    /// Member-to-qubit maps of every GHZ state shared during setup.
    pub fn groups(&self) -> &[BTreeMap<AgentId, QubitId>] {
        &self.groups
    }

    pub fn consumed_links(&self) -> usize {
        self.links.iter().filter(|l| l.consumed).count()
    }

    /// Largest factor (in qubits) ever held during the run.
    pub fn peak_register(&self) -> usize {
        self.peak_register
    }

    pub fn owner(&self, q: QubitId) -> Option<AgentId> {
        self.owners.get(&q).copied()
    }

    pub fn qubits_of(&self, agent: AgentId) -> Vec<QubitId> {
        self.owners
            .iter()
            .filter(|(_, &a)| a == agent)
            .map(|(&q, _)| q)
            .collect()
    }

    pub fn live_qubits(&self) -> usize {
        self.owners.len()
    }

    fn check_agent(&self, a: AgentId) -> Result<()> {
        if a.0 == 0 || a.0 > self.n {
            Err(LoccError::UnknownAgent {
                agent: a,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    fn fresh(&mut self, owner: AgentId) -> QubitId {
        let q = QubitId(self.next_qubit);
        self.next_qubit += 1;
        self.owners.insert(q, owner);
        q
    }

    fn push_factor(&mut self, sv: StateVector) {
        self.peak_register = self.peak_register.max(sv.num_qubits());
        self.factors.push(sv);
    }

    fn factor_index(&self, q: QubitId) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.contains(q))
            .ok_or(LoccError::UnknownQubit(q))
    }

    /// Tensor together every factor touching `qubits`; returns its index.
    fn merge(&mut self, qubits: &[QubitId]) -> Result<usize> {
        let mut idx = qubits
            .iter()
            .map(|&q| self.factor_index(q))
            .collect::<Result<BTreeSet<_>>>()?;
        if idx.len() == 1 {
            return Ok(idx.pop_first().expect("one index"));
        }
        let mut parts: Vec<StateVector> = Vec::with_capacity(idx.len());
        for &i in idx.iter().rev() {
            parts.push(self.factors.remove(i));
        }
        parts.reverse();
        let mut merged = parts.remove(0);
        for p in &parts {
            merged = merged.tensor(p)?;
        }
        self.push_factor(merged);
        Ok(self.factors.len() - 1)
    }

    fn require_setup(&self) -> Result<()> {
        if self.started {
            Err(LoccError::SetupOver)
        } else {
            Ok(())
        }
    }

    fn require_owner(&self, actor: AgentId, q: QubitId) -> Result<()> {
        match self.owners.get(&q) {
            Some(&a) if a == actor => Ok(()),
            Some(_) => Err(LoccError::NotOwner { actor, qubit: q }),
            None => Err(LoccError::UnknownQubit(q)),
        }
    }

    /// Share `(|00⟩ + |11⟩)/√2` between `a` and `b`. Returns (a's half, b's half).
    pub fn distribute_epr(&mut self, a: AgentId, b: AgentId) -> Result<(QubitId, QubitId)> {
        self.require_setup()?;
        self.check_agent(a)?;
        self.check_agent(b)?;
        if a == b {
            return Err(LoccError::SameAgent(a));
        }
        let qa = self.fresh(a);
        let qb = self.fresh(b);
        self.push_factor(StateVector::ghz(&[qa, qb])?);
        self.links.push(EprLink {
            a,
            b,
            qubit_a: qa,
            qubit_b: qb,
            consumed: false,
        });
        self.transcript.events.push(Event::Epr {
            a,
            b,
            qubits: [qa, qb],
        });
        Ok((qa, qb))
    }

    /// Share `(|0…0⟩ + |1…1⟩)/√2` among `members`, one qubit each.
    pub fn distribute_ghz(
        &mut self,
        members: &BTreeSet<AgentId>,
    ) -> Result<BTreeMap<AgentId, QubitId>> {
        self.require_setup()?;
        if members.len() < 2 {
            return Err(LoccError::GroupTooSmall(members.len()));
        }
        for &a in members {
            self.check_agent(a)?;
        }
        let map: BTreeMap<AgentId, QubitId> = members.iter().map(|&a| (a, self.fresh(a))).collect();
        let qubits: Vec<QubitId> = map.values().copied().collect();
        self.push_factor(StateVector::ghz(&qubits)?);
        self.groups.push(map.clone());
        self.transcript.events.push(Event::Ghz {
            members: members.iter().copied().collect(),
            qubits,
        });
        Ok(map)
    }

    /// A fresh `|0⟩` qubit owned by `actor`. Free and always legal.
    pub fn ancilla(&mut self, actor: AgentId) -> Result<QubitId> {
        self.check_agent(actor)?;
        let q = self.fresh(actor);
        self.push_factor(StateVector::new_register(&[q])?);
        self.transcript
            .events
            .push(Event::Ancilla { actor, qubit: q });
        Ok(q)
    }

    /// A fresh qubit of `actor` in the normalized state `amps[0]|0⟩ + amps[1]|1⟩`.
    /// Local and always legal.
    pub fn prepare(&mut self, actor: AgentId, amps: [Complex64; 2]) -> Result<QubitId> {
        self.check_agent(actor)?;
        let q = QubitId(self.next_qubit);
        let sv = StateVector::from_amplitudes(&[q], amps.to_vec())?;
        let q = self.fresh(actor);
        self.push_factor(sv);
        self.transcript.events.push(Event::Prepare {
            actor,
            qubit: q,
            amplitudes: [amps[0].re, amps[0].im, amps[1].re, amps[1].im],
        });
        Ok(q)
    }

    fn apply(&mut self, actor: AgentId, gate: &Gate) -> Result<()> {
        let ops = gate.operands();
        for &q in &ops {
            self.require_owner(actor, q)?;
        }
        if let Gate::Cnot { control, target } = *gate {
            if control == target {
                return Err(StateError::CnotSameOperand(control).into());
            }
        }
        let i = self.merge(&ops)?;
        self.factors[i].apply_gate(gate)?;
        Ok(())
    }

    pub fn local_gate(&mut self, actor: AgentId, gate: Gate) -> Result<()> {
        self.apply(actor, &gate)?;
        self.started = true;
        self.transcript.events.push(Event::Gate {
            actor,
            gate,
            condition: None,
            applied: true,
        });
        Ok(())
    }

    /// Apply `gate` iff the known outcome `on` is 1. Returns whether it fired.
    pub fn local_gate_if(&mut self, actor: AgentId, gate: Gate, on: OutcomeId) -> Result<bool> {
        for q in gate.operands() {
            self.require_owner(actor, q)?;
        }
        if !self.knows(actor, on) {
            return Err(LoccError::Conditioning {
                agent: actor,
                outcome: on,
            });
        }
        let fire = self.outcome_bit(on)? == 1;
        if fire {
            self.apply(actor, &gate)?;
        }
        self.started = true;
        self.transcript.events.push(Event::Gate {
            actor,
            gate,
            condition: Some(on),
            applied: fire,
        });
        Ok(fire)
    }

    pub fn local_measure(
        &mut self,
        actor: AgentId,
        q: QubitId,
    ) -> Result<(OutcomeId, MeasurementOutcome)> {
        self.require_owner(actor, q)?;
        let i = self.factor_index(q)?;
        let p0 = self.factors[i].probability(q, 0)?;
        let choice = self.control.choose(p0);
        let outcome = self.factors[i].measure(q, choice)?;
        let id = OutcomeId(self.outcomes.len() as u32);
        self.outcomes.push((actor, outcome));
        self.known.entry(actor).or_default().insert(id);
        self.started = true;
        self.transcript.events.push(Event::Measure {
            actor,
            qubit: q,
            outcome: id,
            bit: outcome.bit,
            probability: outcome.probability,
        });
        Ok((id, outcome))
    }

    /// Drop a qubit that no longer shares entanglement with anything.
    pub fn discard(&mut self, actor: AgentId, q: QubitId) -> Result<()> {
        self.require_owner(actor, q)?;
        let i = self.factor_index(q)?;
        self.factors[i].discard(q)?;
        if self.factors[i].num_qubits() == 0 {
            self.factors.remove(i);
        }
        self.owners.remove(&q);
        self.started = true;
        self.transcript
            .events
            .push(Event::Discard { actor, qubit: q });
        Ok(())
    }

    /// Trace out a group of qubits that together form whole factors; each owner
    /// just forgets its own qubits, so no communication is involved.
    pub fn release(&mut self, qubits: &[QubitId]) -> Result<()> {
        let wanted: BTreeSet<QubitId> = qubits.iter().copied().collect();
        let idx = qubits
            .iter()
            .map(|&q| self.factor_index(q))
            .collect::<Result<BTreeSet<_>>>()?;
        let covered: BTreeSet<QubitId> = idx
            .iter()
            .flat_map(|&i| self.factors[i].qubits().iter().copied())
            .collect();
        if covered != wanted {
            return Err(LoccError::NotIndependent(qubits.to_vec()));
        }
        for &i in idx.iter().rev() {
            self.factors.remove(i);
        }
        for q in &wanted {
            self.owners.remove(q);
        }
        self.started = true;
        self.transcript.events.push(Event::Release {
            qubits: wanted.into_iter().collect(),
        });
        Ok(())
    }

    pub fn knows(&self, agent: AgentId, outcome: OutcomeId) -> bool {
        self.known.get(&agent).is_some_and(|s| s.contains(&outcome))
    }

    pub fn outcome_bit(&self, id: OutcomeId) -> Result<u8> {
        self.outcomes
            .get(id.0 as usize)
            .map(|(_, o)| o.bit)
            .ok_or(LoccError::UnknownOutcome(id))
    }

    pub fn send_classical(&mut self, msg: ClassicalMessage) -> Result<()> {
        if msg.bits.is_empty() {
            return Err(LoccError::EmptyMessage);
        }
        self.check_agent(msg.sender)?;
        if let Receivers::One(r) = msg.receivers {
            self.check_agent(r)?;
        }
        for bit in &msg.bits {
            if let Some(id) = bit.source {
                if !self.knows(msg.sender, id) {
                    return Err(LoccError::Conditioning {
                        agent: msg.sender,
                        outcome: id,
                    });
                }
                let actual = self.outcome_bit(id)?;
                if actual != bit.value {
                    return Err(LoccError::BitMismatch {
                        outcome: id,
                        actual,
                        claimed: bit.value,
                    });
                }
            }
        }
        let learned: Vec<OutcomeId> = msg.bits.iter().filter_map(|b| b.source).collect();
        let receivers: Vec<AgentId> = match msg.receivers {
            Receivers::One(r) => vec![r],
            Receivers::All => agents(self.n).collect(),
        };
        for r in receivers {
            self.known
                .entry(r)
                .or_default()
                .extend(learned.iter().copied());
        }
        self.cbits += msg.bits.len();
        self.started = true;
        self.transcript.events.push(Event::Message(msg));
        Ok(())
    }

    /// Mark the remaining EPR pairs as reserved for the running protocol.
    pub fn reserve_links(&mut self, by: AgentId) -> Result<()> {
        self.check_agent(by)?;
        self.reserved = true;
        self.started = true;
        self.transcript.events.push(Event::Reserve { by });
        Ok(())
    }

    pub fn links_reserved(&self) -> bool {
        self.reserved
    }

    /// Take an unused EPR pair between `a` and `b`: returns (a's half, b's half).
    pub fn consume_link(&mut self, a: AgentId, b: AgentId) -> Result<(QubitId, QubitId)> {
        let link = self
            .links
            .iter_mut()
            .find(|l| !l.consumed && ((l.a == a && l.b == b) || (l.a == b && l.b == a)))
            .ok_or(LoccError::NoLink(a, b))?;
        link.consumed = true;
        Ok(if link.a == a {
            (link.qubit_a, link.qubit_b)
        } else {
            (link.qubit_b, link.qubit_a)
        })
    }

    pub fn has_unused_link(&self, a: AgentId, b: AgentId) -> bool {
        self.links
            .iter()
            .any(|l| !l.consumed && ((l.a == a && l.b == b) || (l.a == b && l.b == a)))
    }

    /// Von Neumann entropy across the cut `part | rest`, summed over factors.
    pub fn audit_cut(&self, part: &BTreeSet<AgentId>) -> Result<f64> {
        if part.is_empty() || agents(self.n).all(|a| part.contains(&a)) {
            return Err(LoccError::ImproperPartition);
        }
        for &a in part {
            self.check_agent(a)?;
        }
        let mut total = 0.0;
        for f in &self.factors {
            let side: BTreeSet<QubitId> = f
                .qubits()
                .iter()
                .copied()
                .filter(|q| self.owners.get(q).is_some_and(|o| part.contains(o)))
                .collect();
            if !side.is_empty() && side.len() < f.num_qubits() {
                total += f.cut_entropy(&side)?;
            }
        }
        Ok(total)
    }

    /// Joint state of every factor that touches `qubits`.
    pub fn joint_state(&self, qubits: &[QubitId]) -> Result<StateVector> {
        let idx = qubits
            .iter()
            .map(|&q| self.factor_index(q))
            .collect::<Result<BTreeSet<_>>>()?;
        let mut out = StateVector::new_register(&[])?;
        for i in idx {
            out = out.tensor(&self.factors[i])?;
        }
        Ok(out)
    }

    /// The whole network state as one register.
    pub fn full_state(&self) -> Result<StateVector> {
        let mut out = StateVector::new_register(&[])?;
        for f in &self.factors {
            out = out.tensor(f)?;
        }
        Ok(out)
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    /// Snapshot the full state under `label` when tracing is on.
    pub fn checkpoint(&mut self, label: &str) -> Result<()> {
        if self.trace.is_some() {
            let snap = self.full_state()?;
            if let Some(t) = self.trace.as_mut() {
                t.push((label.to_owned(), snap));
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> &[(String, StateVector)] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Re-execute a transcript on a fresh network, forcing every recorded
    /// measurement result. Reproduces the transcript exactly when it is sound.
    pub fn replay(n: u32, transcript: &Transcript) -> Result<NetworkState> {
        let bits = transcript
            .events()
            .iter()
            .filter_map(|e| match e {
                Event::Measure { bit, .. } => Some(*bit),
                _ => None,
            })
            .collect();
        let mut net = NetworkState::new(n, BranchControl::forced(bits));
        for event in transcript.events() {
            match event {
                Event::Epr { a, b, .. } => {
                    net.distribute_epr(*a, *b)?;
                }
                Event::Ghz { members, .. } => {
                    net.distribute_ghz(&members.iter().copied().collect())?;
                }
                Event::Ancilla { actor, .. } => {
                    net.ancilla(*actor)?;
                }
                Event::Prepare {
                    actor,
                    amplitudes: [a, b, c, d],
                    ..
                } => {
                    net.prepare(*actor, [Complex64::new(*a, *b), Complex64::new(*c, *d)])?;
                }
                Event::Gate {
                    actor,
                    gate,
                    condition,
                    ..
                } => match condition {
                    Some(on) => {
                        net.local_gate_if(*actor, *gate, *on)?;
                    }
                    None => net.local_gate(*actor, *gate)?,
                },
                Event::Measure { actor, qubit, .. } => {
                    net.local_measure(*actor, *qubit)?;
                }
                Event::Message(m) => net.send_classical(m.clone())?,
                Event::Discard { actor, qubit } => net.discard(*actor, *qubit)?,
                Event::Release { qubits } => net.release(qubits)?,
                Event::Reserve { by } => net.reserve_links(*by)?,
            }
        }
        Ok(net)
    }
}
