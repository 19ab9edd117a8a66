//! Molecular integrals: loading, frozen-core folding, active-space selection,
//! the seniority-zero reduction and orbital rotations.

mod fcidump;
pub mod manifest;
mod localize;
mod rotation;

pub use manifest::{active_space, Manifest, ManifestEntry};
pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use localize::{localize_pair_spaces, localized_system};
pub use rotation::{exp_antisymmetric, orthogonality_residual, rotate_integrals, KappaMatrix};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::Tensor4;

const SYM_TOL: f64 = 1e-10;

/// Spatial-orbital Hamiltonian in chemist notation.
#[derive(Debug, Clone)]
pub struct MolecularSystem {
    pub n_orb: usize,
    pub n_elec: usize,
    pub e_const: f64,
    pub h: DMatrix<f64>,
    pub eri: Tensor4,
}

impl MolecularSystem {
    pub fn new(n_elec: usize, e_const: f64, h: DMatrix<f64>, eri: Tensor4) -> Result<Self> {
        let n_orb = h.nrows();
        if h.ncols() != n_orb || eri.dim() != n_orb {
            return Err(Error::Dimension(format!(
                "h is {}x{}, eri has dimension {}",
                h.nrows(),
                h.ncols(),
                eri.dim()
            )));
        }
        if n_elec % 2 != 0 || n_elec == 0 || n_elec > 2 * n_orb {
            return Err(Error::Orbitals(format!(
                "{n_elec} electrons in {n_orb} orbitals (need even, 0 < n <= 2·n_orb)"
            )));
        }
        let hres = (&h - h.transpose()).abs().max();
        if hres > SYM_TOL {
            return Err(Error::Dimension(format!("h not symmetric ({hres:.2e})")));
        }
        let eres = eri.sym8_residual();
        if eres > SYM_TOL {
            return Err(Error::Dimension(format!(
                "eri lacks 8-fold symmetry ({eres:.2e})"
            )));
        }
        Ok(Self {
            n_orb,
            n_elec,
            e_const,
            h,
            eri,
        })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_elec / 2
    }

    /// g_pq = h_pq − ½ Σ_r (pr|rq)
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let n = self.n_orb;
        DMatrix::from_fn(n, n, |p, q| {
            self.h[(p, q)] - 0.5 * (0..n).map(|r| self.eri[[p, r, r, q]]).sum::<f64>()
        })
    }

    /// Energy of the closed-shell determinant with the lowest n_elec/2 orbitals doubly occupied.
    pub fn hf_energy(&self) -> f64 {
        let occ = self.n_pairs();
        let mut e = self.e_const;
        for i in 0..occ {
            e += 2.0 * self.h[(i, i)];
            for j in 0..occ {
                e += 2.0 * self.eri[[i, i, j, j]] - self.eri[[i, j, j, i]];
            }
        }
        e
    }
}

/// Folds doubly occupied core orbitals into the constant and one-electron terms.
///
/// e_const += Σ_i 2h_ii + Σ_ij (2(ii|jj) − (ij|ji))
/// h'_pq = h_pq + Σ_i (2(pq|ii) − (pi|iq))
pub fn fold_frozen_core(sys: &MolecularSystem, frozen: &[usize]) -> Result<MolecularSystem> {
    if frozen.is_empty() {
        return Ok(sys.clone());
    }
    let n = sys.n_orb;
    let mut seen = vec![false; n];
    for &i in frozen {
        if i >= n {
            return Err(Error::Orbitals(format!("frozen orbital {i} out of range (n_orb={n})")));
        }
        if seen[i] {
            return Err(Error::Orbitals(format!("frozen orbital {i} listed twice")));
        }
        seen[i] = true;
    }
    if frozen.len() >= sys.n_pairs() {
        return Err(Error::Orbitals(format!(
            "freezing {} orbitals leaves no active pair ({} electrons)",
            frozen.len(),
            sys.n_elec
        )));
    }

    let mut e_const = sys.e_const;
    for &i in frozen {
        e_const += 2.0 * sys.h[(i, i)];
        for &j in frozen {
            e_const += 2.0 * sys.eri[[i, i, j, j]] - sys.eri[[i, j, j, i]];
        }
    }
    let mut h = sys.h.clone();
    for p in 0..n {
        for q in 0..n {
            for &i in frozen {
                h[(p, q)] += 2.0 * sys.eri[[p, q, i, i]] - sys.eri[[p, i, i, q]];
            }
        }
    }
    let active: Vec<usize> = (0..n).filter(|p| !seen[*p]).collect();
    let h = DMatrix::from_fn(active.len(), active.len(), |a, b| h[(active[a], active[b])]);
    MolecularSystem::new(
        sys.n_elec - 2 * frozen.len(),
        e_const,
        h,
        sys.eri.slice(&active),
    )
}

/// Keeps the listed orbitals (re-indexed in the given order). Dropped orbitals are
/// treated as empty, so the reference orbitals 0..n_elec/2 must all be kept.
pub fn select_active(sys: &MolecularSystem, keep: &[usize]) -> Result<MolecularSystem> {
    let n = sys.n_orb;
    let mut seen = vec![false; n];
    for &p in keep {
        if p >= n {
            return Err(Error::Orbitals(format!("orbital {p} out of range (n_orb={n})")));
        }
        if seen[p] {
            return Err(Error::Orbitals(format!("orbital {p} listed twice")));
        }
        seen[p] = true;
    }
    if let Some(missing) = (0..sys.n_pairs()).find(|i| !seen[*i]) {
        return Err(Error::Orbitals(format!(
            "occupied orbital {missing} would be discarded"
        )));
    }
    let h = DMatrix::from_fn(keep.len(), keep.len(), |a, b| sys.h[(keep[a], keep[b])]);
    MolecularSystem::new(sys.n_elec, sys.e_const, h, sys.eri.slice(keep))
}

/// Coefficients of the Hamiltonian restricted to the seniority-zero sector.
#[derive(Debug, Clone)]
pub struct SzHamiltonian {
    pub e_const: f64,
    pub g: DMatrix<f64>,
    /// (pp|qq)
    pub j_mat: DMatrix<f64>,
    /// (pq|qp)
    pub k_mat: DMatrix<f64>,
    /// (pq|pq), the pair-hop amplitude
    pub w_mat: DMatrix<f64>,
}

impl SzHamiltonian {
    pub fn n_orb(&self) -> usize {
        self.g.nrows()
    }

    /// ⟨b|H|b⟩ for a pair-occupation bitstring (bit p set = orbital p doubly occupied).
    pub fn diagonal(&self, bits: u64) -> f64 {
        let n = self.n_orb();
        let occ: Vec<usize> = (0..n).filter(|p| bits >> p & 1 == 1).collect();
        let mut e = self.e_const;
        for &p in &occ {
            e += 2.0 * h_diag(self, p) + self.j_mat[(p, p)];
            for &q in &occ {
                if q != p {
                    e += 2.0 * self.j_mat[(p, q)] - self.k_mat[(p, q)];
                }
            }
        }
        e
    }
}

fn h_diag(hsz: &SzHamiltonian, p: usize) -> f64 {
    let n = hsz.n_orb();
    hsz.g[(p, p)] + 0.5 * (0..n).map(|r| hsz.k_mat[(p, r)]).sum::<f64>()
}

pub fn build_seniority_zero(sys: &MolecularSystem) -> SzHamiltonian {
    let n = sys.n_orb;
    let e = &sys.eri;
    SzHamiltonian {
        e_const: sys.e_const,
        g: sys.g_matrix(),
        j_mat: DMatrix::from_fn(n, n, |p, q| e[[p, p, q, q]]),
        k_mat: DMatrix::from_fn(n, n, |p, q| e[[p, q, q, p]]),
        w_mat: DMatrix::from_fn(n, n, |p, q| e[[p, q, p, q]]),
    }
}
