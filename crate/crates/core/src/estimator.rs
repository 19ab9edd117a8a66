//! Energy and reduced density matrices from three global measurement bases.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrals::{MolecularSystem, SzHamiltonian};
use crate::simulator::{Basis, Circuit, Gate, ShotCounts, StateVector};
use crate::tensor::Tensor4;

/// Seniority-zero expectation values. All quantities are symmetric in (p, q).
#[derive(Debug, Clone, PartialEq)]
pub struct RdmSet {
    /// ⟨n_pα + n_pβ⟩
    pub z: Vec<f64>,
    /// ⟨n_pα n_qα + n_pβ n_qβ⟩
    pub gam: DMatrix<f64>,
    /// ⟨n_pα n_qβ⟩
    pub del: DMatrix<f64>,
    /// Re⟨d†_p d_q⟩ for p ≠ q (diagonal unused, zero)
    pub phop: DMatrix<f64>,
    pub z_err: Vec<f64>,
    /// stderr of P̂(b_p = b_q = 1), the estimator behind Γ and Δ
    pub pair_err: DMatrix<f64>,
    pub phop_err: DMatrix<f64>,
}

impl RdmSet {
    pub fn zeros(n: usize) -> Self {
        Self {
            z: vec![0.0; n],
            gam: DMatrix::zeros(n, n),
            del: DMatrix::zeros(n, n),
            phop: DMatrix::zeros(n, n),
            z_err: vec![0.0; n],
            pair_err: DMatrix::zeros(n, n),
            phop_err: DMatrix::zeros(n, n),
        }
    }

    pub fn n_orb(&self) -> usize {
        self.z.len()
    }

    pub fn n_elec(&self) -> f64 {
        self.z.iter().sum()
    }

    pub fn is_exact(&self) -> bool {
        self.z_err.iter().all(|&e| e == 0.0)
            && self.pair_err.iter().all(|&e| e == 0.0)
            && self.phop_err.iter().all(|&e| e == 0.0)
    }
}

/// Spinless one- and two-particle density matrices.
///
/// gamma2[p][q][r][s] = ½⟨E_pq E_rs⟩ with E_pq = Σ_σ a†_pσ a_qσ, so that
/// E = e_const + Σ g_pq γ_pq + Σ (pq|rs) gamma2_pqrs with g_pq = h_pq − ½Σ_r (pr|rq).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinlessRdms {
    pub gamma1: DMatrix<f64>,
    pub gamma2: Tensor4,
}

impl SpinlessRdms {
    pub fn n_orb(&self) -> usize {
        self.gamma1.nrows()
    }

    pub fn energy(&self, sys: &MolecularSystem) -> f64 {
        let g = sys.g_matrix();
        let one: f64 = g.component_mul(&self.gamma1).sum();
        let two: f64 = self
            .gamma2
            .iter_nonzero()
            .map(|(idx, v)| v * sys.eri[idx])
            .sum();
        sys.e_const + one + two
    }
}

/// Z, X and Y basis versions of `base`.
pub fn measurement_circuits(base: &Circuit) -> [(Basis, Circuit); 3] {
    let n = base.n_qubits;
    let mut x = base.clone();
    let mut y = base.clone();
    for q in 0..n {
        x.gates.push(Gate::H(q));
        y.gates.push(Gate::Sdg(q));
        y.gates.push(Gate::H(q));
    }
    [(Basis::Z, base.clone()), (Basis::X, x), (Basis::Y, y)]
}

fn check_counts(c: &ShotCounts, n: usize, basis: Basis) -> Result<()> {
    if c.shots == 0 {
        return Err(Error::EmptyCounts);
    }
    if c.n_qubits != n {
        return Err(Error::Dimension(format!(
            "{} counts on {} qubits, expected {n}",
            c.basis, c.n_qubits
        )));
    }
    if c.basis != basis {
        return Err(Error::Dimension(format!("expected {basis} counts, got {}", c.basis)));
    }
    Ok(())
}

// mean and stderr of (1−2b_p)(1−2b_q) over the counts, for every p < q
fn parity_means(c: &ShotCounts, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (&b, &k) in &c.counts {
        for p in 0..n {
            for q in (p + 1)..n {
                let par = if (b >> p ^ b >> q) & 1 == 1 { -1.0 } else { 1.0 };
                m[(p, q)] += par * k as f64;
            }
        }
    }
    let s = c.shots as f64;
    let mut err = DMatrix::<f64>::zeros(n, n);
    for p in 0..n {
        for q in (p + 1)..n {
            let v = m[(p, q)] / s;
            m[(p, q)] = v;
            m[(q, p)] = v;
            let e = ((1.0f64 - v * v).max(0.0) / s).sqrt();
            err[(p, q)] = e;
            err[(q, p)] = e;
        }
    }
    (m, err)
}

pub fn estimate_from_counts(
    counts_z: &ShotCounts,
    counts_x: &ShotCounts,
    counts_y: &ShotCounts,
) -> Result<RdmSet> {
    let n = counts_z.n_qubits;
    check_counts(counts_z, n, Basis::Z)?;
    check_counts(counts_x, n, Basis::X)?;
    check_counts(counts_y, n, Basis::Y)?;
    let s = counts_z.shots as f64;
    let binom = |p: f64| (p * (1.0 - p) / s).max(0.0).sqrt();

    let mut single = vec![0.0; n];
    let mut both = DMatrix::<f64>::zeros(n, n);
    for (&b, &k) in &counts_z.counts {
        let k = k as f64;
        for p in 0..n {
            if b >> p & 1 == 1 {
                single[p] += k;
                for q in (p + 1)..n {
                    if b >> q & 1 == 1 {
                        both[(p, q)] += k;
                    }
                }
            }
        }
    }
    let mut out = RdmSet::zeros(n);
    for p in 0..n {
        let pr = single[p] / s;
        out.z[p] = 2.0 * pr;
        out.z_err[p] = 2.0 * binom(pr);
        out.gam[(p, p)] = out.z[p];
        out.del[(p, p)] = 0.5 * out.z[p];
        for q in (p + 1)..n {
            let pr = both[(p, q)] / s;
            let e = binom(pr);
            for (a, b) in [(p, q), (q, p)] {
                out.gam[(a, b)] = 2.0 * pr;
                out.del[(a, b)] = pr;
                out.pair_err[(a, b)] = e;
            }
        }
    }
    let (xx, xx_err) = parity_means(counts_x, n);
    let (yy, yy_err) = parity_means(counts_y, n);
    for p in 0..n {
        for q in 0..n {
            if p != q {
                out.phop[(p, q)] = 0.25 * (xx[(p, q)] + yy[(p, q)]);
                out.phop_err[(p, q)] = 0.25 * xx_err[(p, q)].hypot(yy_err[(p, q)]);
            }
        }
    }
    Ok(out)
}

/// Energy and its standard error. The error treats per-orbital and per-pair
/// estimators as independent.
pub fn energy_from_rdms(rdms: &RdmSet, hsz: &SzHamiltonian) -> Result<(f64, f64)> {
    let n = rdms.n_orb();
    if hsz.n_orb() != n {
        return Err(Error::Dimension(format!(
            "RDMs on {n} orbitals, Hamiltonian on {}",
            hsz.n_orb()
        )));
    }
    let (j, k, w, g) = (&hsz.j_mat, &hsz.k_mat, &hsz.w_mat, &hsz.g);
    let mut e = hsz.e_const;
    for p in 0..n {
        e += g[(p, p)] * rdms.z[p];
        for q in 0..n {
            e += j[(p, q)] * (0.5 * rdms.gam[(p, q)] + rdms.del[(p, q)]);
            if p != q {
                e += 0.5 * k[(p, q)] * (rdms.z[p] - rdms.gam[(p, q)]);
                e += w[(p, q)] * rdms.phop[(p, q)];
            }
        }
    }

    // dE/dz_p and dE/dP̂(b_p b_q) for the unordered pair, with Γ = 2P̂ and Δ = P̂
    let mut var = 0.0;
    for p in 0..n {
        let dz = g[(p, p)] + j[(p, p)] + 0.5 * (0..n).filter(|&q| q != p).map(|q| k[(p, q)]).sum::<f64>();
        var += (dz * rdms.z_err[p]).powi(2);
        for q in (p + 1)..n {
            let dpair = 2.0 * (2.0 * j[(p, q)] - k[(p, q)]);
            var += (dpair * rdms.pair_err[(p, q)]).powi(2);
            var += (2.0 * w[(p, q)] * rdms.phop_err[(p, q)]).powi(2);
        }
    }
    Ok((e, var.sqrt()))
}

pub fn assemble_spinless_rdms(rdms: &RdmSet) -> SpinlessRdms {
    let n = rdms.n_orb();
    let mut gamma1 = DMatrix::zeros(n, n);
    let mut gamma2 = Tensor4::zeros(n);
    for p in 0..n {
        gamma1[(p, p)] = rdms.z[p];
        gamma2[[p, p, p, p]] = rdms.z[p];
        for q in 0..n {
            if p == q {
                continue;
            }
            // density-density, exchange, pair hop
            gamma2[[p, p, q, q]] = 0.5 * rdms.gam[(p, q)] + rdms.del[(p, q)];
            gamma2[[p, q, q, p]] = 0.5 * (rdms.z[p] - rdms.gam[(p, q)]);
            gamma2[[p, q, p, q]] = rdms.phop[(p, q)];
        }
    }
    SpinlessRdms { gamma1, gamma2 }
}

/// Shot-free RdmSet from Pauli expectation values.
pub fn exact_rdms(state: &StateVector) -> Result<RdmSet> {
    let n = state.n_qubits();
    let probs = state.probabilities();
    let mut out = RdmSet::zeros(n);
    let mut both = DMatrix::<f64>::zeros(n, n);
    for (b, &pr) in probs.iter().enumerate() {
        if pr == 0.0 {
            continue;
        }
        for p in (0..n).filter(|p| b >> p & 1 == 1) {
            out.z[p] += pr;
            for q in (p + 1..n).filter(|q| b >> q & 1 == 1) {
                both[(p, q)] += pr;
            }
            // ⟨X_pX_q + Y_pY_q⟩/4 = Re Σ_b conj(ψ_b') ψ_b, b' = b with p,q swapped
            for q in (p + 1..n).filter(|q| b >> q & 1 == 0) {
                let v = state.amps[b ^ (1 << p) ^ (1 << q)].conj() * state.amps[b];
                out.phop[(p, q)] += v.re;
            }
        }
    }
    for p in 0..n {
        out.z[p] *= 2.0;
        out.gam[(p, p)] = out.z[p];
        out.del[(p, p)] = 0.5 * out.z[p];
        for q in (p + 1)..n {
            let v = out.phop[(p, q)];
            for (a, c) in [(p, q), (q, p)] {
                out.gam[(a, c)] = 2.0 * both[(p, q)];
                out.del[(a, c)] = both[(p, q)];
                out.phop[(a, c)] = v;
            }
        }
    }
    Ok(out)
}
