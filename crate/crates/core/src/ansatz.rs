//! Pair-excitation (upCCD) circuits built from Givens rotations.

use crate::error::{Error, Result};
use crate::integrals::MolecularSystem;
use crate::simulator::{Circuit, Gate};
use crate::vqe_driver::{self, VqeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Decomposition {
    /// Two CX gates in the magic basis.
    #[default]
    Magic,
    /// Two XX rotations.
    Xx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairAnsatz {
    pub n_orb: usize,
    pub occ: Vec<usize>,
    pub virt: Vec<usize>,
    /// (i, a) with i ascending outer, a ascending inner
    pub excitations: Vec<(usize, usize)>,
    pub t: Vec<f64>,
    pub active_mask: Vec<bool>,
}

impl PairAnsatz {
    /// Reference with the lowest `n_pairs` orbitals occupied, all amplitudes zero and active.
    pub fn new(n_orb: usize, n_pairs: usize) -> Result<Self> {
        if n_pairs > n_orb {
            return Err(Error::Orbitals(format!("{n_pairs} pairs in {n_orb} orbitals")));
        }
        let occ: Vec<usize> = (0..n_pairs).collect();
        let virt: Vec<usize> = (n_pairs..n_orb).collect();
        let excitations: Vec<(usize, usize)> = occ
            .iter()
            .flat_map(|&i| virt.iter().map(move |&a| (i, a)))
            .collect();
        let m = excitations.len();
        Ok(Self {
            n_orb,
            occ,
            virt,
            excitations,
            t: vec![0.0; m],
            active_mask: vec![true; m],
        })
    }

    pub fn for_system(sys: &MolecularSystem) -> Result<Self> {
        Self::new(sys.n_orb, sys.n_pairs())
    }

    pub fn n_params(&self) -> usize {
        self.excitations.len()
    }

    pub fn n_active(&self) -> usize {
        self.active_mask.iter().filter(|&&m| m).count()
    }

    pub fn with_params(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.n_params() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {} excitations",
                t.len(),
                self.n_params()
            )));
        }
        Ok(Self {
            t: t.to_vec(),
            ..self.clone()
        })
    }

    pub fn reference_bits(&self) -> usize {
        self.occ.iter().map(|&i| 1usize << i).sum()
    }
}

pub fn reference_circuit(ansatz: &PairAnsatz) -> Circuit {
    let mut circ = Circuit::new(ansatz.n_orb);
    for &i in &ansatz.occ {
        circ.gates.push(Gate::X(i));
    }
    circ
}

fn check_pair(n_qubits: usize, q_i: usize, q_a: usize) -> Result<()> {
    if q_i == q_a {
        return Err(Error::RepeatedQubit(q_i));
    }
    for q in [q_i, q_a] {
        if q >= n_qubits {
            return Err(Error::QubitIndex { index: q, n_qubits });
        }
    }
    Ok(())
}

/// Givens rotation |i⟩ → cos(θ/2)|i⟩ + sin(θ/2)|a⟩ on the pair {q_i, q_a}, identity on
/// |00⟩ and |11⟩. Magic-basis form with two CX gates (control q_i).
pub fn givens_block(theta: f64, q_i: usize, q_a: usize, n_qubits: usize) -> Result<Circuit> {
    check_pair(n_qubits, q_i, q_a)?;
    let half = theta / 2.0;
    let cx = Gate::Cx {
        control: q_i,
        target: q_a,
    };
    Ok(Circuit {
        n_qubits,
        gates: vec![
            Gate::S(q_a),
            Gate::S(q_i),
            Gate::H(q_i),
            cx,
            Gate::Ry(q_a, half),
            Gate::Ry(q_i, half),
            cx,
            Gate::Sdg(q_a),
            Gate::H(q_i),
            Gate::Sdg(q_i),
        ],
    })
}

/// Same rotation from two XX entanglers.
pub fn givens_block_xx(theta: f64, q_i: usize, q_a: usize, n_qubits: usize) -> Result<Circuit> {
    check_pair(n_qubits, q_i, q_a)?;
    let quarter = theta / 4.0;
    Ok(Circuit {
        n_qubits,
        gates: vec![
            Gate::Sdg(q_a),
            Gate::Xx(q_a, q_i, quarter),
            Gate::S(q_a),
            Gate::Sdg(q_i),
            Gate::Xx(q_a, q_i, -quarter),
            Gate::S(q_i),
        ],
    })
}

pub fn build_upccd_circuit(ansatz: &PairAnsatz) -> Circuit {
    build_upccd_circuit_with(ansatz, Decomposition::Magic)
}

pub fn build_upccd_circuit_with(ansatz: &PairAnsatz, decomposition: Decomposition) -> Circuit {
    let n = ansatz.n_orb;
    let mut circ = reference_circuit(ansatz);
    for (k, &(i, a)) in ansatz.excitations.iter().enumerate() {
        if !ansatz.active_mask[k] {
            continue;
        }
        let block = match decomposition {
            Decomposition::Magic => givens_block(ansatz.t[k], i, a, n),
            Decomposition::Xx => givens_block_xx(ansatz.t[k], i, a, n),
        }
        .expect("excitation indices are distinct and in range");
        circ.gates.extend(block.gates);
    }
    circ
}

/// Outcome of redundancy screening.
#[derive(Debug, Clone)]
pub struct ScreeningReport {
    pub active_mask: Vec<bool>,
    /// max |t| seen over every SPSA iterate, per excitation
    pub max_abs_t: Vec<f64>,
    pub final_t: Vec<f64>,
    pub converged: bool,
}

/// Runs a zero-initialized exact-mode optimization and marks an excitation inactive
/// when its amplitude never left zero (max over the whole history below `threshold`).
pub fn screen_redundant(
    sys: &MolecularSystem,
    ansatz: &PairAnsatz,
    cfg: &VqeConfig,
    threshold: f64,
) -> Result<ScreeningReport> {
    let mut cfg = cfg.clone();
    cfg.shots = 0;
    cfg.noise = Default::default();
    let start = PairAnsatz {
        t: vec![0.0; ansatz.n_params()],
        active_mask: vec![true; ansatz.n_params()],
        ..ansatz.clone()
    };
    let result = vqe_driver::run_vqe(sys, &start, &cfg)?;
    let active_mask = result.max_abs_t.iter().map(|&m| m >= threshold).collect();
    Ok(ScreeningReport {
        active_mask,
        max_abs_t: result.max_abs_t.clone(),
        final_t: result.t.clone(),
        converged: result.converged,
    })
}
