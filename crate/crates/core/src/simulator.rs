//! Dense statevector simulation. Qubit 0 is the least significant bit of the
//! basis index; qubit p carries the pair occupation of spatial orbital p.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    /// exp(−iθY/2)
    Ry(usize, f64),
    Rx(usize, f64),
    Rz(usize, f64),
    Cx { control: usize, target: usize },
    /// exp(−iθ X⊗X)
    Xx(usize, usize, f64),
    /// exp(−iθ Z⊗X), Z on the first qubit
    Zx(usize, usize, f64),
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X(q) => write!(f, "X({q})"),
            Gate::H(q) => write!(f, "H({q})"),
            Gate::S(q) => write!(f, "S({q})"),
            Gate::Sdg(q) => write!(f, "Sdg({q})"),
            Gate::Ry(q, t) => write!(f, "Ry({q}, {t})"),
            Gate::Rx(q, t) => write!(f, "Rx({q}, {t})"),
            Gate::Rz(q, t) => write!(f, "Rz({q}, {t})"),
            Gate::Cx { control, target } => write!(f, "CX({control}, {target})"),
            Gate::Xx(a, b, t) => write!(f, "XX({a}, {b}, {t})"),
            Gate::Zx(a, b, t) => write!(f, "ZX({a}, {b}, {t})"),
        }
    }
}

/// Gate unitary: 2×2 on one qubit, or 4×4 on (first, second) with the first
/// qubit as the more significant bit of the local index.
pub enum GateMatrix {
    One(usize, [[C64; 2]; 2]),
    Two(usize, usize, [[C64; 4]; 4]),
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::S(q) | Gate::Sdg(q) => vec![q],
            Gate::Ry(q, _) | Gate::Rx(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cx { control, target } => vec![control, target],
            Gate::Xx(a, b, _) | Gate::Zx(a, b, _) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx { .. } | Gate::Xx(..) | Gate::Zx(..))
    }

    pub fn adjoint(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::Xx(a, b, t) => Gate::Xx(a, b, -t),
            Gate::Zx(a, b, t) => Gate::Zx(a, b, -t),
            g => g,
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        let z = c(0.0);
        let o = c(1.0);
        match *self {
            Gate::X(q) => GateMatrix::One(q, [[z, o], [o, z]]),
            Gate::H(q) => {
                let h = c(std::f64::consts::FRAC_1_SQRT_2);
                GateMatrix::One(q, [[h, h], [h, -h]])
            }
            Gate::S(q) => GateMatrix::One(q, [[o, z], [z, I]]),
            Gate::Sdg(q) => GateMatrix::One(q, [[o, z], [z, -I]]),
            Gate::Ry(q, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                GateMatrix::One(q, [[c(co), c(-s)], [c(s), c(co)]])
            }
            Gate::Rx(q, t) => {
                let (s, co) = (t / 2.0).sin_cos();
                GateMatrix::One(q, [[c(co), -I * s], [-I * s, c(co)]])
            }
            Gate::Rz(q, t) => {
                let e = C64::from_polar(1.0, t / 2.0);
                GateMatrix::One(q, [[e.conj(), z], [z, e]])
            }
            Gate::Cx { control, target } => GateMatrix::Two(
                control,
                target,
                [[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]],
            ),
            Gate::Xx(a, b, t) => {
                let (s, co) = t.sin_cos();
                let (d, m) = (c(co), -I * s);
                GateMatrix::Two(a, b, [[d, z, z, m], [z, d, m, z], [z, m, d, z], [m, z, z, d]])
            }
            Gate::Zx(a, b, t) => {
                // Z⊗X = diag(X, −X)
                let (s, co) = t.sin_cos();
                let (d, m) = (c(co), -I * s);
                GateMatrix::Two(a, b, [[d, m, z, z], [m, d, z, z], [z, z, d, -m], [z, z, -m, d]])
            }
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::RepeatedQubit(qs[0]));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    /// Appends a gate after checking its qubit indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::Dimension(format!(
                "appending a {}-qubit circuit to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn adjoint(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn cx_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cx { .. }))
            .count()
    }

    /// Full 2^N × 2^N unitary, column j = circuit applied to |j⟩. Row-major, dim·dim entries.
    pub fn unitary(&self) -> Vec<Vec<C64>> {
        let dim = 1usize << self.n_qubits;
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut st = StateVector::basis(self.n_qubits, j);
            for g in &self.gates {
                st.apply(g);
            }
            cols.push(st.amps);
        }
        (0..dim)
            .map(|i| (0..dim).map(|j| cols[j][i]).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Dimension(format!("{} amplitudes", amps.len())));
        }
        Ok(Self { amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    // Unchecked gate application; indices were validated when the circuit was built.
    pub(crate) fn apply(&mut self, gate: &Gate) {
        match gate.matrix() {
            GateMatrix::One(q, m) => self.apply_one(q, &m),
            GateMatrix::Two(qa, qb, m) => self.apply_two(qa, qb, &m),
        }
    }

    fn apply_one(&mut self, q: usize, m: &[[C64; 2]; 2]) {
        let bit = 1usize << q;
        let low = bit - 1;
        for k in 0..self.amps.len() / 2 {
            let i = ((k & !low) << 1) | (k & low);
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_two(&mut self, qa: usize, qb: usize, m: &[[C64; 4]; 4]) {
        let (ba, bb) = (1usize << qa, 1usize << qb);
        let (lo, hi) = (qa.min(qb), qa.max(qb));
        for k in 0..self.amps.len() / 4 {
            let i = insert_zero(insert_zero(k, lo), hi);
            // local index 2·bit(qa) + bit(qb)
            let idx = [i, i | bb, i | ba, i | ba | bb];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }
}

fn insert_zero(k: usize, bit: usize) -> usize {
    let low = (1usize << bit) - 1;
    ((k & !low) << 1) | (k & low)
}

fn matmul4(a: &[[C64; 4]; 4], b: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

// gate as a 4×4 on the ordered pair (a, other), local index 2·bit(a) + bit(other)
fn embed(g: &Gate, a: usize) -> [[C64; 4]; 4] {
    let z = C64::new(0.0, 0.0);
    let mut out = [[z; 4]; 4];
    match g.matrix() {
        GateMatrix::One(q, m) => {
            for i in 0..4 {
                for j in 0..4 {
                    let (ia, ib, ja, jb) = (i >> 1, i & 1, j >> 1, j & 1);
                    out[i][j] = if q == a {
                        if ib == jb { m[ia][ja] } else { z }
                    } else if ia == ja {
                        m[ib][jb]
                    } else {
                        z
                    };
                }
            }
        }
        GateMatrix::Two(x, _, m) => {
            if x == a {
                out = m;
            } else {
                let sw = [0, 2, 1, 3];
                for i in 0..4 {
                    for j in 0..4 {
                        out[i][j] = m[sw[i]][sw[j]];
                    }
                }
            }
        }
    }
    out
}

/// Merges runs of consecutive gates that together touch at most two qubits.
fn fuse(gates: &[Gate]) -> Vec<GateMatrix> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < gates.len() {
        let mut qs: Vec<usize> = gates[i].qubits();
        let mut j = i + 1;
        while j < gates.len() {
            let mut u = qs.clone();
            for q in gates[j].qubits() {
                if !u.contains(&q) {
                    u.push(q);
                }
            }
            if u.len() > 2 {
                break;
            }
            qs = u;
            j += 1;
        }
        if j == i + 1 {
            out.push(gates[i].matrix());
        } else if qs.len() == 1 {
            let mut m = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
            for g in &gates[i..j] {
                if let GateMatrix::One(_, gm) = g.matrix() {
                    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
                    for a in 0..2 {
                        for b in 0..2 {
                            r[a][b] = gm[a][0] * m[0][b] + gm[a][1] * m[1][b];
                        }
                    }
                    m = r;
                }
            }
            out.push(GateMatrix::One(qs[0], m));
        } else {
            let (a, b) = (qs[0], qs[1]);
            let mut m = embed(&gates[i], a);
            for g in &gates[i + 1..j] {
                m = matmul4(&embed(g, a), &m);
            }
            out.push(GateMatrix::Two(a, b, m));
        }
        i = j;
    }
    out
}

pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    gate.validate(state.n_qubits())?;
    let mut out = state.clone();
    out.apply(gate);
    Ok(out)
}

pub fn run_circuit(initial: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    if initial.n_qubits() != circuit.n_qubits {
        return Err(Error::Dimension(format!(
            "state has {} qubits, circuit {}",
            initial.n_qubits(),
            circuit.n_qubits
        )));
    }
    for g in &circuit.gates {
        g.validate(circuit.n_qubits)?;
    }
    let mut st = initial.clone();
    for m in fuse(&circuit.gates) {
        match m {
            GateMatrix::One(q, m) => st.apply_one(q, &m),
            GateMatrix::Two(a, b, m) => st.apply_two(a, b, &m),
        }
    }
    Ok(st)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        };
        f.write_str(s)
    }
}

/// Measurement outcomes keyed by basis index (bit p = qubit p).
#[derive(Debug, Clone, PartialEq)]
pub struct ShotCounts {
    pub n_qubits: usize,
    pub basis: Basis,
    pub counts: BTreeMap<usize, u64>,
    pub shots: u64,
}

impl ShotCounts {
    pub fn new(n_qubits: usize, basis: Basis) -> Self {
        Self {
            n_qubits,
            basis,
            counts: BTreeMap::new(),
            shots: 0,
        }
    }

    pub fn record(&mut self, outcome: usize, times: u64) {
        *self.counts.entry(outcome).or_insert(0) += times;
        self.shots += times;
    }

    /// Printed with qubit N−1 leftmost.
    pub fn bitstring(&self, outcome: usize) -> String {
        (0..self.n_qubits)
            .rev()
            .map(|q| if outcome >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn merge(&mut self, other: &ShotCounts) {
        for (&k, &v) in &other.counts {
            self.record(k, v);
        }
    }
}

/// Inverse-CDF sampler over a fixed distribution.
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let total = acc;
        for v in &mut cdf {
            *v /= total;
        }
        Self { cdf }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&v| v <= u);
        idx.min(self.cdf.len() - 1)
    }
}

pub fn sample_with<R: Rng + ?Sized>(state: &StateVector, shots: u64, basis: Basis, rng: &mut R) -> ShotCounts {
    let sampler = Sampler::new(&state.probabilities());
    let mut out = ShotCounts::new(state.n_qubits(), basis);
    for _ in 0..shots {
        out.record(sampler.draw(rng), 1);
    }
    out
}

/// Computational-basis samples with a seeded generator.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> ShotCounts {
    let mut rng = stream_rng(seed, 0);
    sample_with(state, shots, Basis::Z, &mut rng)
}

/// ⟨ψ|P|ψ⟩ for a Pauli string whose k-th character acts on qubit k.
pub fn expectation_pauli(state: &StateVector, pauli: &str) -> Result<f64> {
    let chars: Vec<char> = pauli.chars().collect();
    if chars.len() != state.n_qubits() {
        return Err(Error::Dimension(format!(
            "Pauli string of length {} on {} qubits",
            chars.len(),
            state.n_qubits()
        )));
    }
    let (mut xmask, mut zmask, mut n_y) = (0usize, 0usize, 0u32);
    for (q, ch) in chars.iter().enumerate() {
        match ch.to_ascii_uppercase() {
            'I' => {}
            'X' => xmask |= 1 << q,
            'Z' => zmask |= 1 << q,
            'Y' => {
                xmask |= 1 << q;
                zmask |= 1 << q;
                n_y += 1;
            }
            other => return Err(Error::Pauli(other)),
        }
    }
    // Y = i·X·Z, so P|i⟩ = i^{n_y} (−1)^{|i ∧ zmask|} |i ⊕ xmask⟩
    let phase = I.powu(n_y);
    let mut acc = C64::new(0.0, 0.0);
    for (i, a) in state.amps.iter().enumerate() {
        let sign = if (i & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += state.amps[i ^ xmask].conj() * a * sign;
    }
    let val = acc * phase;
    debug_assert!(val.im.abs() < 1e-10, "non-real Pauli expectation {val}");
    Ok(val.re)
}
