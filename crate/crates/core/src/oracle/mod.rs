//! Brute-force references: DOCI, FCI, determinant-space RDMs, finite-difference
//! derivative checks and orbital-optimized DOCI.

mod fci;
pub mod fock;

pub use fci::{fci_ground_state, fci_ground_state_with, FciOptions};
pub use crate::pair_sector::{binomial, PairBasis};

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{assemble_spinless_rdms, RdmSet, SpinlessRdms};
use crate::integrals::{
    build_seniority_zero, exp_antisymmetric, localize_pair_spaces, rotate_integrals, KappaMatrix,
    MolecularSystem, SzHamiltonian,
};
use crate::orbital_opt::{oo_iteration, orbital_gradient, OrbitalConfig};
use crate::simulator::StateVector;
use crate::tensor::Tensor4;

pub const DOCI_LIMIT: usize = 10_000;

/// Random closed-shell system: symmetric h with spread diagonal, and a positive
/// semidefinite ERI built as Σ_L B^L_pq B^L_rs with symmetric B^L.
pub fn random_system<R: Rng + ?Sized>(n: usize, n_elec: usize, rng: &mut R) -> MolecularSystem {
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        h[(p, p)] = -2.0 + 0.6 * p as f64 + rng.gen_range(-0.2..0.2);
        for q in 0..p {
            let v = rng.gen_range(-0.2..0.2);
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    let mut eri = Tensor4::zeros(n);
    for _ in 0..n {
        let mut b = DMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..=p {
                let v = if p == q { rng.gen_range(0.2..0.6) } else { rng.gen_range(-0.15..0.15) };
                b[(p, q)] = v;
                b[(q, p)] = v;
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        eri[[p, q, r, s]] += b[(p, q)] * b[(r, s)];
                    }
                }
            }
        }
    }
    let e_const = rng.gen_range(-1.0..1.0);
    MolecularSystem::new(n_elec, e_const, h, eri).expect("random system is valid")
}

/// Dense Hamiltonian on the pair basis: diagonal from the occupation formula,
/// off-diagonal pair hops W_pq moving a pair q → p.
pub fn pair_hamiltonian(hsz: &SzHamiltonian, basis: &PairBasis) -> DMatrix<f64> {
    let n = basis.n_orb;
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (i, &b) in basis.states.iter().enumerate() {
        m[(i, i)] = hsz.diagonal(b as u64);
        for q in (0..n).filter(|q| b >> q & 1 == 1) {
            for p in (0..n).filter(|p| b >> p & 1 == 0) {
                let j = basis.index_of(b ^ (1 << q) ^ (1 << p)).unwrap();
                m[(j, i)] += hsz.w_mat[(p, q)];
            }
        }
    }
    m
}

/// Lowest eigenpair of the pair-space Hamiltonian. The vector's largest component is positive.
pub fn doci_ground_state(hsz: &SzHamiltonian, n_pairs: usize) -> Result<(f64, DVector<f64>, PairBasis)> {
    doci_ground_state_from(hsz, n_pairs, None)
}

// below this size the dense eigensolver is cheaper than Davidson
const DOCI_DENSE: usize = 200;

/// As [`doci_ground_state`], optionally warm-starting the iterative solver.
pub fn doci_ground_state_from(
    hsz: &SzHamiltonian,
    n_pairs: usize,
    guess: Option<&DVector<f64>>,
) -> Result<(f64, DVector<f64>, PairBasis)> {
    let n = hsz.n_orb();
    let dim = binomial(n, n_pairs);
    if dim > DOCI_LIMIT {
        return Err(Error::TooLarge {
            what: "DOCI",
            dim,
            limit: DOCI_LIMIT,
        });
    }
    let basis = PairBasis::new(n, n_pairs);
    let m = pair_hamiltonian(hsz, &basis);
    let (e, mut v) = if dim <= DOCI_DENSE {
        let eig = SymmetricEigen::new(m);
        let k = eig.eigenvalues.imin();
        (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
    } else {
        let diag: Vec<f64> = (0..dim).map(|i| m[(i, i)]).collect();
        fci::davidson(&diag, |x| &m * x, guess, 1e-10, 500)?
    };
    if v[v.iamax()] < 0.0 {
        v = -v;
    }
    Ok((e, v, basis))
}

/// RdmSet of a real pair-basis vector, computed directly from its amplitudes.
pub fn pair_vector_rdms(basis: &PairBasis, psi: &DVector<f64>) -> RdmSet {
    let n = basis.n_orb;
    let mut out = RdmSet::zeros(n);
    for (i, &b) in basis.states.iter().enumerate() {
        let w = psi[i] * psi[i];
        for p in (0..n).filter(|p| b >> p & 1 == 1) {
            out.z[p] += 2.0 * w;
            for q in (0..n).filter(|&q| q != p && b >> q & 1 == 1) {
                out.gam[(p, q)] += 2.0 * w;
                out.del[(p, q)] += w;
            }
            for q in (0..n).filter(|q| b >> q & 1 == 0) {
                // ⟨d†_q d_p⟩ contribution
                let j = basis.index_of(b ^ (1 << p) ^ (1 << q)).unwrap();
                out.phop[(q, p)] += psi[j] * psi[i];
            }
        }
    }
    for p in 0..n {
        out.gam[(p, p)] = out.z[p];
        out.del[(p, p)] = 0.5 * out.z[p];
    }
    out
}

type Det = (usize, usize);

// a†_p a_q acting on one spin string; returns (sign, new string)
fn excite(bits: usize, p: usize, q: usize) -> Option<(f64, usize)> {
    if bits >> q & 1 == 0 {
        return None;
    }
    let b1 = bits ^ (1 << q);
    let mut sign = if (bits & ((1 << q) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    if b1 >> p & 1 == 1 {
        return None;
    }
    if (b1 & ((1 << p) - 1)).count_ones() % 2 == 1 {
        sign = -sign;
    }
    Some((sign, b1 | (1 << p)))
}

// E_pq applied to a determinant-space vector. Determinants are (α, β) strings and
// the α string precedes the β string in operator order.
fn apply_e(p: usize, q: usize, v: &HashMap<Det, f64>) -> HashMap<Det, f64> {
    let mut out = HashMap::new();
    for (&(a, b), &c) in v {
        if let Some((s, a2)) = excite(a, p, q) {
            *out.entry((a2, b)).or_insert(0.0) += s * c;
        }
        if let Some((s, b2)) = excite(b, p, q) {
            // moving past the α string leaves the sign unchanged (E_pq has even length)
            *out.entry((a, b2)).or_insert(0.0) += s * c;
        }
    }
    out
}

fn dot(a: &HashMap<Det, f64>, b: &HashMap<Det, f64>) -> f64 {
    let (small, big) = if a.len() < b.len() { (a, b) } else { (b, a) };
    small.iter().filter_map(|(k, v)| big.get(k).map(|w| v * w)).sum()
}

/// γ_pq = ⟨E_pq⟩ and G_pqrs = ½⟨E_pq E_rs⟩ by explicit fermionic operator action on
/// the determinant expansion of a pair-sector state (pair bitstring b ↦ α = β = b).
pub fn rdm_oracle(state: &StateVector, n_orb: usize) -> Result<SpinlessRdms> {
    let mut k = 0;
    let weights: Vec<usize> = state
        .amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-20)
        .map(|(b, _)| b.count_ones() as usize)
        .collect();
    if let Some(&w) = weights.first() {
        k = w;
    }
    let basis = PairBasis::new(n_orb, k);
    let psi = basis.project(state)?;
    let mut v: HashMap<Det, f64> = HashMap::new();
    for (i, &b) in basis.states.iter().enumerate() {
        if psi[i] != 0.0 {
            v.insert((b, b), psi[i]);
        }
    }
    let n = n_orb;
    let e: Vec<HashMap<Det, f64>> = (0..n * n).map(|x| apply_e(x / n, x % n, &v)).collect();
    let mut gamma1 = DMatrix::zeros(n, n);
    let mut gamma2 = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            gamma1[(p, q)] = dot(&v, &e[p * n + q]);
            for r in 0..n {
                for s in 0..n {
                    // ⟨E_pq E_rs⟩ = ⟨E_qp Ψ | E_rs Ψ⟩
                    gamma2[[p, q, r, s]] = 0.5 * dot(&e[q * n + p], &e[r * n + s]);
                }
            }
        }
    }
    Ok(SpinlessRdms { gamma1, gamma2 })
}

/// E(κ) at fixed RDMs after rotating the integrals by exp(K(κ)).
pub fn energy_at_kappa(sys: &MolecularSystem, rdms: &SpinlessRdms, kappa: &[f64]) -> Result<f64> {
    let k = KappaMatrix::from_packed(sys.n_orb, kappa)?;
    let rotated = rotate_integrals(sys, &exp_antisymmetric(&k))?;
    Ok(rdms.energy(&rotated))
}

#[derive(Debug, Clone)]
pub struct FdReport {
    pub analytic: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// max |analytic − fd| / max(‖fd‖∞, 1e-12)
    pub max_rel_err: f64,
}

/// Central differences of E(κ_x ± h) against the analytic gradient.
pub fn fd_gradient_check(sys: &MolecularSystem, rdms: &SpinlessRdms, h: f64) -> Result<FdReport> {
    let analytic = orbital_gradient(rdms, sys)?;
    let d = analytic.len();
    let mut fd = vec![0.0; d];
    for x in 0..d {
        let mut k = vec![0.0; d];
        k[x] = h;
        let ep = energy_at_kappa(sys, rdms, &k)?;
        k[x] = -h;
        let em = energy_at_kappa(sys, rdms, &k)?;
        fd[x] = (ep - em) / (2.0 * h);
    }
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let err = analytic
        .iter()
        .zip(&fd)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(FdReport {
        analytic,
        finite_difference: fd,
        max_rel_err: err / scale,
    })
}

/// Second-difference Hessian of E(κ) with step h.
pub fn fd_hessian(sys: &MolecularSystem, rdms: &SpinlessRdms, h: f64) -> Result<DMatrix<f64>> {
    let d = KappaMatrix::n_params(sys.n_orb);
    let e = |k: &[f64]| energy_at_kappa(sys, rdms, k);
    let e0 = e(&vec![0.0; d])?;
    let mut q = DMatrix::zeros(d, d);
    for x in 0..d {
        let mut k = vec![0.0; d];
        k[x] = h;
        let ep = e(&k)?;
        k[x] = -h;
        let em = e(&k)?;
        q[(x, x)] = (ep - 2.0 * e0 + em) / (h * h);
        for y in 0..x {
            let mut acc = 0.0;
            for (sx, sy, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut k = vec![0.0; d];
                k[x] = sx * h;
                k[y] = sy * h;
                acc += sign * e(&k)?;
            }
            q[(x, y)] = acc / (4.0 * h * h);
            q[(y, x)] = q[(x, y)];
        }
    }
    Ok(q)
}

#[derive(Debug, Clone)]
pub struct OoDociResult {
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// rotation from the input orbitals to the optimized ones
    pub rotation: DMatrix<f64>,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct OoDociConfig {
    pub orbital: OrbitalConfig,
    pub grad_tol: f64,
    pub max_iter: usize,
    /// starting rotations; the lowest converged energy wins
    pub seeds: Vec<DMatrix<f64>>,
}

impl OoDociConfig {
    /// Canonical and localized starting orbitals.
    pub fn standard(sys: &MolecularSystem) -> Self {
        Self {
            orbital: OrbitalConfig::default(),
            grad_tol: 1e-6,
            max_iter: 300,
            seeds: vec![DMatrix::identity(sys.n_orb, sys.n_orb), localize_pair_spaces(sys)],
        }
    }
}

/// DOCI with Newton orbital optimization from a single starting rotation.
pub fn oo_doci_from(sys: &MolecularSystem, c0: &DMatrix<f64>, cfg: &OoDociConfig) -> Result<OoDociResult> {
    let n_pairs = sys.n_pairs();
    let mut cur = rotate_integrals(sys, c0)?;
    let mut total = c0.clone();
    let mut energy = f64::NAN;
    let mut grad_norm = f64::INFINITY;
    let mut prev: Option<DVector<f64>> = None;
    for it in 0..=cfg.max_iter {
        let (e, psi, basis) = doci_ground_state_from(&build_seniority_zero(&cur), n_pairs, prev.as_ref())?;
        energy = e;
        let rdms = assemble_spinless_rdms(&pair_vector_rdms(&basis, &psi));
        let omega = orbital_gradient(&rdms, &cur)?;
        grad_norm = omega.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if grad_norm < cfg.grad_tol || it == cfg.max_iter {
            return Ok(OoDociResult {
                energy,
                iterations: it,
                converged: grad_norm < cfg.grad_tol,
                rotation: total,
                grad_norm,
            });
        }
        let (next, report) = oo_iteration(&cur, &rdms, &cfg.orbital)?;
        total *= &report.rotation;
        cur = next;
        prev = Some(psi);
    }
    Ok(OoDociResult {
        energy,
        iterations: cfg.max_iter,
        converged: false,
        rotation: total,
        grad_norm,
    })
}

/// Orbital-optimized DOCI over the configured seeds; returns the lowest minimum.
pub fn oo_doci(sys: &MolecularSystem, cfg: &OoDociConfig) -> Result<OoDociResult> {
    let mut best: Option<OoDociResult> = None;
    for c0 in &cfg.seeds {
        let r = oo_doci_from(sys, c0, cfg)?;
        if best.as_ref().map_or(true, |b| r.energy < b.energy) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Orbitals("no orbital seeds given".into()))
}
