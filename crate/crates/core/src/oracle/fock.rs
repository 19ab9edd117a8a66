//! Explicit second-quantized operators on the full Fock space of 2n spin orbitals
//! (spin orbital 2p + σ, Jordan-Wigner signs). Dense; meant for n ≤ 4.

use nalgebra::{DMatrix, DVector};

use crate::integrals::MolecularSystem;

fn so(p: usize, sigma: usize) -> usize {
    2 * p + sigma
}

// product of operators applied right-to-left: (create?, spin orbital)
fn act(state: usize, ops: &[(bool, usize)]) -> Option<(f64, usize)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(create, k) in ops.iter().rev() {
        let occ = s >> k & 1 == 1;
        if occ == create {
            return None;
        }
        if (s & ((1 << k) - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        s ^= 1 << k;
    }
    Some((sign, s))
}

/// H = e_const + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ.
pub fn hamiltonian(sys: &MolecularSystem) -> DMatrix<f64> {
    let n = sys.n_orb;
    let dim = 1usize << (2 * n);
    let mut m = DMatrix::identity(dim, dim) * sys.e_const;
    for st in 0..dim {
        for p in 0..n {
            for q in 0..n {
                let h = sys.h[(p, q)];
                for s in 0..2 {
                    if h != 0.0 {
                        if let Some((sg, out)) = act(st, &[(true, so(p, s)), (false, so(q, s))]) {
                            m[(out, st)] += sg * h;
                        }
                    }
                    for r in 0..n {
                        for t in 0..n {
                            let v = sys.eri[[p, q, r, t]];
                            if v == 0.0 {
                                continue;
                            }
                            for u in 0..2 {
                                let ops = [(true, so(p, s)), (true, so(r, u)), (false, so(t, u)), (false, so(q, s))];
                                if let Some((sg, out)) = act(st, &ops) {
                                    m[(out, st)] += 0.5 * sg * v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    m
}

/// Σ_pq k_pq E_pq.
pub fn one_body(n: usize, k: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = 1usize << (2 * n);
    let mut m = DMatrix::zeros(dim, dim);
    for st in 0..dim {
        for p in 0..n {
            for q in 0..n {
                if k[(p, q)] == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    if let Some((sg, out)) = act(st, &[(true, so(p, s)), (false, so(q, s))]) {
                        m[(out, st)] += sg * k[(p, q)];
                    }
                }
            }
        }
    }
    m
}

/// Fock-space indices with the given α and β electron counts.
pub fn sector(n: usize, n_alpha: usize, n_beta: usize) -> Vec<usize> {
    (0..1usize << (2 * n))
        .filter(|st| {
            let a = (0..n).filter(|p| st >> so(*p, 0) & 1 == 1).count();
            let b = (0..n).filter(|p| st >> so(*p, 1) & 1 == 1).count();
            a == n_alpha && b == n_beta
        })
        .collect()
}

/// Fock vector of the pair state Σ_b c_b Π_{p∈b} a†_pα a†_pβ |0⟩.
pub fn pair_state(n: usize, coeffs: &[(usize, f64)]) -> DVector<f64> {
    let mut v = DVector::zeros(1 << (2 * n));
    for &(b, c) in coeffs {
        let st: usize = (0..n).filter(|p| b >> p & 1 == 1).map(|p| 3usize << (2 * p)).sum();
        v[st] += c;
    }
    v
}
