//! Exact simulation restricted to the seniority-zero sector: the pair-occupation
//! basis and a real-amplitude evaluator for noiseless upCCD states.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::ansatz::PairAnsatz;
use crate::error::{Error, Result};
use crate::estimator::RdmSet;
use crate::simulator::StateVector;

/// Pair-occupation bitstrings of fixed weight, ascending.
#[derive(Debug, Clone)]
pub struct PairBasis {
    pub n_orb: usize,
    pub n_pairs: usize,
    pub states: Vec<usize>,
    index: HashMap<usize, usize>,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl PairBasis {
    pub fn new(n_orb: usize, n_pairs: usize) -> Self {
        let states: Vec<usize> = (0usize..1 << n_orb)
            .filter(|b| b.count_ones() as usize == n_pairs)
            .collect();
        let index = states.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        Self {
            n_orb,
            n_pairs,
            states,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, bits: usize) -> Option<usize> {
        self.index.get(&bits).copied()
    }

    /// Coefficients of a statevector on this basis; errors if weight lies outside it.
    pub fn project(&self, state: &StateVector) -> Result<DVector<f64>> {
        let outside: f64 = state
            .amps
            .iter()
            .enumerate()
            .filter(|(b, _)| self.index_of(*b).is_none())
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if outside > 1e-8 {
            return Err(Error::NotPairSector(outside));
        }
        // a global phase is allowed; align it with the largest component
        let lead = state
            .amps
            .iter()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .copied()
            .unwrap();
        let phase = lead.conj() / lead.norm();
        Ok(DVector::from_iterator(
            self.len(),
            self.states.iter().map(|&b| (state.amps[b] * phase).re),
        ))
    }
}


/// Evaluates upCCD states directly on the pair basis. On this sector every Givens
/// block is the real rotation |i⟩ → cos(θ/2)|i⟩ + sin(θ/2)|a⟩, so the result equals
/// the noiseless circuit up to a global phase.
#[derive(Debug, Clone)]
pub struct PairSectorEngine {
    pub basis: PairBasis,
    reference: usize,
    // per excitation: (index with i occupied and a empty, index after the move)
    moves: Vec<Vec<(usize, usize)>>,
    // every pair (j < k) of basis states related by one pair hop, with (p, q)
    hops: Vec<(usize, usize, usize, usize)>,
}

impl PairSectorEngine {
    pub fn new(ansatz: &PairAnsatz) -> Result<Self> {
        let basis = PairBasis::new(ansatz.n_orb, ansatz.occ.len());
        let reference = basis
            .index_of(ansatz.reference_bits())
            .ok_or_else(|| Error::Dimension("reference outside the pair basis".into()))?;
        let moves = ansatz
            .excitations
            .iter()
            .map(|&(i, a)| {
                basis
                    .states
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b >> i & 1 == 1 && b >> a & 1 == 0)
                    .map(|(j, &b)| (j, basis.index_of(b ^ (1 << i) ^ (1 << a)).unwrap()))
                    .collect()
            })
            .collect();
        let n = ansatz.n_orb;
        let mut hops = Vec::new();
        for (j, &b) in basis.states.iter().enumerate() {
            for p in (0..n).filter(|p| b >> p & 1 == 1) {
                for q in (0..n).filter(|q| b >> q & 1 == 0) {
                    let k = basis.index_of(b ^ (1 << p) ^ (1 << q)).unwrap();
                    if j < k {
                        hops.push((j, k, p.min(q), p.max(q)));
                    }
                }
            }
        }
        Ok(Self {
            basis,
            reference,
            moves,
            hops,
        })
    }

    /// Amplitudes of the upCCD state for `t`, skipping inactive excitations.
    pub fn state(&self, t: &[f64], mask: &[bool]) -> Result<DVector<f64>> {
        if t.len() != self.moves.len() || mask.len() != self.moves.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes / {} mask entries for {} excitations",
                t.len(),
                mask.len(),
                self.moves.len()
            )));
        }
        let mut psi = DVector::zeros(self.basis.len());
        psi[self.reference] = 1.0;
        for ((moves, &theta), &on) in self.moves.iter().zip(t).zip(mask) {
            if !on {
                continue;
            }
            let (s, c) = (theta / 2.0).sin_cos();
            for &(j, k) in moves {
                let (x, y) = (psi[j], psi[k]);
                psi[j] = c * x - s * y;
                psi[k] = s * x + c * y;
            }
        }
        Ok(psi)
    }

    pub fn rdms(&self, psi: &DVector<f64>) -> RdmSet {
        let n = self.basis.n_orb;
        let mut out = RdmSet::zeros(n);
        for (j, &b) in self.basis.states.iter().enumerate() {
            let w = psi[j] * psi[j];
            if w == 0.0 {
                continue;
            }
            for p in (0..n).filter(|p| b >> p & 1 == 1) {
                out.z[p] += 2.0 * w;
                for q in (p + 1..n).filter(|q| b >> q & 1 == 1) {
                    out.del[(p, q)] += w;
                }
            }
        }
        for &(j, k, p, q) in &self.hops {
            out.phop[(p, q)] += psi[j] * psi[k];
        }
        for p in 0..n {
            out.gam[(p, p)] = out.z[p];
            out.del[(p, p)] = 0.5 * out.z[p];
            for q in (p + 1)..n {
                let (d, h) = (out.del[(p, q)], out.phop[(p, q)]);
                out.del[(q, p)] = d;
                out.gam[(p, q)] = 2.0 * d;
                out.gam[(q, p)] = 2.0 * d;
                out.phop[(q, p)] = h;
            }
        }
        out
    }
}
