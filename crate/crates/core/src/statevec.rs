//! Exact pure-state simulation over a dynamic set of labeled qubits.
//!
//! Amplitude index bit `b` (least significant first) addresses `qubits[b]`.
//! Every comparison between two registers aligns qubits by [`QubitId`], never
//! by position, so reordering or relabeling a register never changes a
//! fidelity or an entropy.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for norms and outcome probabilities.
pub const PROB_EPS: f64 = 1e-12;
/// Tolerance for fidelity, purity and entropy assertions.
pub const FIDELITY_EPS: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Stable identifier of a qubit for its whole lifetime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// The gate set used by every protocol: X, Z, H and CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "UPPERCASE")]
pub enum Gate {
    X { target: QubitId },
    Z { target: QubitId },
    H { target: QubitId },
    Cnot { control: QubitId, target: QubitId },
}

impl Gate {
    pub fn x(target: QubitId) -> Self {
        Gate::X { target }
    }

    pub fn z(target: QubitId) -> Self {
        Gate::Z { target }
    }

    pub fn h(target: QubitId) -> Self {
        Gate::H { target }
    }

    pub fn cnot(control: QubitId, target: QubitId) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn operands(&self) -> Vec<QubitId> {
        match *self {
            Gate::X { target } | Gate::Z { target } | Gate::H { target } => vec![target],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X { target } => write!(f, "X({target})"),
            Gate::Z { target } => write!(f, "Z({target})"),
            Gate::H { target } => write!(f, "H({target})"),
            Gate::Cnot { control, target } => write!(f, "CNOT({control}->{target})"),
        }
    }
}

/// How a measurement picks its outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Choice {
    /// Force the given bit; fails if that branch has zero probability.
    Forced(u8),
    /// Uniform draw in `[0, 1)`: outcome 0 iff `draw < P(0)`.
    Draw(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub qubit: QubitId,
    pub bit: u8,
    pub probability: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit {0} appears more than once")]
    DuplicateQubit(QubitId),
    #[error("qubit {0} is not in the register")]
    UnknownQubit(QubitId),
    #[error("CNOT control and target are both {0}")]
    CnotSameOperand(QubitId),
    #[error("outcome {bit} on {qubit} has probability {probability:e}")]
    ImpossibleOutcome {
        qubit: QubitId,
        bit: u8,
        probability: f64,
    },
    #[error("{qubit} is still entangled with the register (reduced purity {purity})")]
    StillEntangled { qubit: QubitId, purity: f64 },
    #[error("registers hold different qubit sets")]
    QubitSetMismatch,
    #[error("subset must be a nonempty proper subset of the register")]
    ImproperSubset,
    #[error("amplitude vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("amplitudes are not normalized (norm squared {0})")]
    NotNormalized(f64),
}

pub type Result<T, E = StateError> = std::result::Result<T, E>;

/// Normalized amplitudes over an ordered list of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: Vec<QubitId>,
    amps: Vec<Complex64>,
}

fn check_distinct(ids: &[QubitId]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &q in ids {
        if !seen.insert(q) {
            return Err(StateError::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Gather the bits of `index` at `positions` into a compact integer.
#[inline]
fn gather(index: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (((index >> p) & 1) << k))
}

/// Insert `bit` at position `pos` into `index`.
#[inline]
fn insert_bit(index: usize, pos: usize, bit: usize) -> usize {
    let low = index & ((1 << pos) - 1);
    let high = index >> pos;
    (high << (pos + 1)) | (bit << pos) | low
}

impl StateVector {
    /// `|0…0⟩` over `ids`. An empty list gives the scalar state `1`.
    pub fn new_register(ids: &[QubitId]) -> Result<Self> {
        check_distinct(ids)?;
        let mut amps = vec![ZERO; 1 << ids.len()];
        amps[0] = ONE;
        Ok(Self {
            qubits: ids.to_vec(),
            amps,
        })
    }

    pub fn from_amplitudes(ids: &[QubitId], amps: Vec<Complex64>) -> Result<Self> {
        check_distinct(ids)?;
        let expected = 1usize << ids.len();
        if amps.len() != expected {
            return Err(StateError::BadLength {
                got: amps.len(),
                expected,
            });
        }
        let mut sv = Self {
            qubits: ids.to_vec(),
            amps,
        };
        let norm = sv.norm_sqr();
        if (norm - 1.0).abs() > FIDELITY_EPS {
            return Err(StateError::NotNormalized(norm));
        }
        sv.renormalize();
        Ok(sv)
    }

    /// Computational basis state; `bits[i]` is the value of `ids[i]`.
    pub fn basis_state(ids: &[QubitId], bits: &[u8]) -> Result<Self> {
        let mut sv = Self::new_register(ids)?;
        assert_eq!(ids.len(), bits.len(), "one bit per qubit");
        let index = bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &b)| acc | ((b as usize & 1) << k));
        sv.amps[0] = ZERO;
        sv.amps[index] = ONE;
        Ok(sv)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` over `ids`.
    pub fn ghz(ids: &[QubitId]) -> Result<Self> {
        let mut sv = Self::new_register(ids)?;
        if ids.is_empty() {
            return Ok(sv);
        }
        let last = sv.amps.len() - 1;
        sv.amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        sv.amps[last] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Ok(sv)
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn contains(&self, q: QubitId) -> bool {
        self.qubits.contains(&q)
    }

    fn position(&self, q: QubitId) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&x| x == q)
            .ok_or(StateError::UnknownQubit(q))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn renormalize(&mut self) {
        let scale = 1.0 / self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
    }

    /// Tensor product; `other`'s qubits take the higher bit positions.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let mut qubits = self.qubits.clone();
        qubits.extend_from_slice(&other.qubits);
        check_distinct(&qubits)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            amps.extend(self.amps.iter().map(|a| a * b));
        }
        Ok(StateVector { qubits, amps })
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::X { target } => {
                let m = 1 << self.position(target)?;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            Gate::Z { target } => {
                let m = 1 << self.position(target)?;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::H { target } => {
                let m = 1 << self.position(target)?;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let a = self.amps[i];
                        let b = self.amps[i | m];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | m] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                if control == target {
                    return Err(StateError::CnotSameOperand(control));
                }
                let mc = 1 << self.position(control)?;
                let mt = 1 << self.position(target)?;
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
        }
        Ok(())
    }

    /// Probability that measuring `q` yields `bit`.
    pub fn probability(&self, q: QubitId, bit: u8) -> Result<f64> {
        let m = 1 << self.position(q)?;
        let want = if bit == 0 { 0 } else { m };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    fn project(&mut self, pos: usize, bit: u8, probability: f64) {
        let m = 1 << pos;
        let want = if bit == 0 { 0 } else { m };
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m == want {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }

    /// Computational-basis measurement of `q`, collapsing the register in place.
    /// The measured qubit stays in the register (in `|bit⟩`) until discarded.
    pub fn measure(&mut self, q: QubitId, choice: Choice) -> Result<MeasurementOutcome> {
        let pos = self.position(q)?;
        let p0 = self.probability(q, 0)?;
        let p1 = (1.0 - p0).max(0.0);
        let bit = match choice {
            Choice::Forced(b) => b.min(1),
            Choice::Draw(u) => {
                if u < p0 {
                    0
                } else {
                    1
                }
            }
        };
        let probability = if bit == 0 { p0 } else { p1 };
        if probability <= PROB_EPS {
            return Err(StateError::ImpossibleOutcome {
                qubit: q,
                bit,
                probability,
            });
        }
        self.project(pos, bit, probability);
        Ok(MeasurementOutcome {
            qubit: q,
            bit,
            probability,
        })
    }

    /// Every nonzero-probability outcome of measuring `q`, with its post-state.
    pub fn enumerate_branches(&self, q: QubitId) -> Result<Vec<(MeasurementOutcome, StateVector)>> {
        let mut out = Vec::with_capacity(2);
        for bit in 0..2u8 {
            let mut branch = self.clone();
            match branch.measure(q, Choice::Forced(bit)) {
                Ok(outcome) => out.push((outcome, branch)),
                Err(StateError::ImpossibleOutcome { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Probability that `a` and `b` read different values in the computational basis.
    pub fn parity_probability(&self, a: QubitId, b: QubitId) -> Result<f64> {
        let ma = 1 << self.position(a)?;
        let mb = 1 << self.position(b)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & ma != 0) != (i & mb != 0))
            .map(|(_, x)| x.norm_sqr())
            .sum())
    }

    /// Single-qubit reduced density matrix `[[ρ00, ρ01], [ρ10, ρ11]]`.
    pub fn reduced_qubit(&self, q: QubitId) -> Result<[[Complex64; 2]; 2]> {
        let m = 1 << self.position(q)?;
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | m];
                rho[0][0] += a0 * a0.conj();
                rho[0][1] += a0 * a1.conj();
                rho[1][0] += a1 * a0.conj();
                rho[1][1] += a1 * a1.conj();
            }
        }
        Ok(rho)
    }

    /// Purity `tr(ρ²)` of the single-qubit reduced state of `q`.
    pub fn qubit_purity(&self, q: QubitId) -> Result<f64> {
        let rho = self.reduced_qubit(q)?;
        Ok(rho[0][0].re.powi(2) + rho[1][1].re.powi(2) + 2.0 * rho[0][1].norm_sqr())
    }

    /// Remove a qubit that is in a product state with the rest of the register.
    pub fn discard(&mut self, q: QubitId) -> Result<()> {
        let pos = self.position(q)?;
        let purity = self.qubit_purity(q)?;
        if purity < 1.0 - FIDELITY_EPS {
            return Err(StateError::StillEntangled { qubit: q, purity });
        }
        // For a pure reduced state ρ = v v†, recover v from the larger diagonal entry.
        let rho = self.reduced_qubit(q)?;
        let v = if rho[0][0].re >= rho[1][1].re {
            let v0 = rho[0][0].re.sqrt();
            [Complex64::new(v0, 0.0), rho[1][0] / v0]
        } else {
            let v1 = rho[1][1].re.sqrt();
            [rho[0][1] / v1, Complex64::new(v1, 0.0)]
        };
        let half = self.amps.len() / 2;
        let mut rest = vec![ZERO; half];
        for (j, r) in rest.iter_mut().enumerate() {
            let i0 = insert_bit(j, pos, 0);
            let i1 = insert_bit(j, pos, 1);
            *r = v[0].conj() * self.amps[i0] + v[1].conj() * self.amps[i1];
        }
        self.amps = rest;
        self.qubits.remove(pos);
        self.renormalize();
        Ok(())
    }

    /// `⟨self|other⟩` with qubits aligned by id.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.qubits.len() != other.qubits.len() {
            return Err(StateError::QubitSetMismatch);
        }
        let perm = other
            .qubits
            .iter()
            .map(|&q| self.position(q).map_err(|_| StateError::QubitSetMismatch))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| a.conj() * other.amps[gather(i, &perm)])
            .sum())
    }

    /// `|⟨target|self⟩|²`, insensitive to the global phase of either side.
    pub fn fidelity(&self, target: &StateVector) -> Result<f64> {
        Ok(target.inner(self)?.norm_sqr().min(1.0))
    }

    /// `⟨target|ρ|target⟩` where `ρ` is the reduced state of `self` on the
    /// qubits of `target`, which must be a subset of this register.
    pub fn subsystem_fidelity(&self, target: &StateVector) -> Result<f64> {
        let inner_pos = target
            .qubits
            .iter()
            .map(|&q| self.position(q))
            .collect::<Result<Vec<_>>>()?;
        let outer_pos: Vec<usize> = (0..self.qubits.len())
            .filter(|p| !inner_pos.contains(p))
            .collect();
        let mut acc = vec![ZERO; 1 << outer_pos.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let t = target.amps[gather(i, &inner_pos)];
            if t != ZERO {
                acc[gather(i, &outer_pos)] += t.conj() * a;
            }
        }
        Ok(acc.iter().map(|c| c.norm_sqr()).sum::<f64>().min(1.0))
    }

    /// Reduced density matrix on `subset`, indexed in the order of `subset`.
    pub fn reduced_density(&self, subset: &[QubitId]) -> Result<DMatrix<Complex64>> {
        check_distinct(subset)?;
        let inner_pos = subset
            .iter()
            .map(|&q| self.position(q))
            .collect::<Result<Vec<_>>>()?;
        let outer_pos: Vec<usize> = (0..self.qubits.len())
            .filter(|p| !inner_pos.contains(p))
            .collect();
        let m = self.schmidt_matrix(&inner_pos, &outer_pos);
        Ok(&m * m.adjoint())
    }

    fn schmidt_matrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1 << rows.len(), 1 << cols.len(), ZERO);
        for (i, a) in self.amps.iter().enumerate() {
            m[(gather(i, rows), gather(i, cols))] = *a;
        }
        m
    }

    /// Von Neumann entropy (bits) of the reduced state on `subset`.
    pub fn cut_entropy(&self, subset: &BTreeSet<QubitId>) -> Result<f64> {
        if subset.is_empty() || subset.len() >= self.qubits.len() {
            return Err(StateError::ImproperSubset);
        }
        let inner_pos = subset
            .iter()
            .map(|&q| self.position(q))
            .collect::<Result<Vec<_>>>()?;
        let outer_pos: Vec<usize> = (0..self.qubits.len())
            .filter(|p| !inner_pos.contains(p))
            .collect();
        let m = self.schmidt_matrix(&inner_pos, &outer_pos);
        // The smaller Gram matrix carries the same nonzero spectrum.
        let gram = if inner_pos.len() <= outer_pos.len() {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        let eigen = gram.symmetric_eigen();
        let entropy: f64 = eigen
            .eigenvalues
            .iter()
            .filter(|&&l| l > 1e-14)
            .map(|&l| -l * l.log2())
            .sum();
        Ok(entropy.max(0.0))
    }
}
