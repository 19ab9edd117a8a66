//! Full CI in the determinant space of α and β strings.
//!
//! Small spaces are diagonalized densely with matrix elements from the
//! Slater-Condon rules; larger ones use Davidson iterations with a
//! string-driven sigma build.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::integrals::MolecularSystem;

#[derive(Debug, Clone)]
pub struct FciOptions {
    pub max_dets: usize,
    /// spaces up to this size are diagonalized densely
    pub dense_limit: usize,
    /// orbitals forced doubly occupied in every determinant
    pub core: Vec<usize>,
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for FciOptions {
    fn default() -> Self {
        Self {
            max_dets: 100_000,
            dense_limit: 2_000,
            core: Vec::new(),
            residual_tol: 1e-8,
            max_iter: 500,
        }
    }
}

pub fn fci_ground_state(sys: &MolecularSystem, n_alpha: usize, n_beta: usize) -> Result<f64> {
    fci_ground_state_with(sys, n_alpha, n_beta, &FciOptions::default())
}

fn strings(n: usize, k: usize, core: &[usize]) -> Vec<usize> {
    let core_mask: usize = core.iter().map(|&c| 1usize << c).sum();
    (0usize..1 << n)
        .filter(|b| b.count_ones() as usize == k && b & core_mask == core_mask)
        .collect()
}

pub fn fci_ground_state_with(
    sys: &MolecularSystem,
    n_alpha: usize,
    n_beta: usize,
    opts: &FciOptions,
) -> Result<f64> {
    let n = sys.n_orb;
    if n_alpha > n || n_beta > n || 2 * n > 64 {
        return Err(Error::Orbitals(format!(
            "{n_alpha}α/{n_beta}β electrons in {n} orbitals"
        )));
    }
    let alpha = strings(n, n_alpha, &opts.core);
    let beta = strings(n, n_beta, &opts.core);
    let dim = alpha.len() * beta.len();
    if dim > opts.max_dets {
        return Err(Error::TooLarge {
            what: "FCI",
            dim,
            limit: opts.max_dets,
        });
    }
    if dim == 0 {
        return Err(Error::Orbitals("empty determinant space".into()));
    }
    let sc = SlaterCondon::new(sys);
    let dets: Vec<u64> = alpha
        .iter()
        .flat_map(|&a| beta.iter().map(move |&b| (a as u64) | ((b as u64) << n)))
        .collect();
    if dim <= opts.dense_limit {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = sc.element(dets[i], dets[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(m);
        return Ok(eig.eigenvalues.min() + sys.e_const);
    }
    let diag: Vec<f64> = dets.iter().map(|&d| sc.element(d, d)).collect();
    let sigma = StringSigma::new(sys, &alpha, &beta);
    let (e, _) = davidson(&diag, |c| sigma.apply(c), None, opts.residual_tol, opts.max_iter)?;
    Ok(e + sys.e_const)
}

struct SlaterCondon<'a> {
    sys: &'a MolecularSystem,
    n: usize,
}

impl<'a> SlaterCondon<'a> {
    fn new(sys: &'a MolecularSystem) -> Self {
        Self { sys, n: sys.n_orb }
    }

    fn spatial(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    fn h(&self, i: usize, j: usize) -> f64 {
        let (p, sp) = self.spatial(i);
        let (q, sq) = self.spatial(j);
        if sp == sq { self.sys.h[(p, q)] } else { 0.0 }
    }

    // physicist ⟨ij|kl⟩ = (ik|jl)
    fn phys(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (p, si) = self.spatial(i);
        let (q, sj) = self.spatial(j);
        let (r, sk) = self.spatial(k);
        let (s, sl) = self.spatial(l);
        if si == sk && sj == sl { self.sys.eri[[p, r, q, s]] } else { 0.0 }
    }

    fn anti(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.phys(i, j, k, l) - self.phys(i, j, l, k)
    }

    fn element(&self, bra: u64, ket: u64) -> f64 {
        let diff = bra ^ ket;
        let occ = |d: u64| (0..2 * self.n).filter(move |&k| d >> k & 1 == 1);
        match diff.count_ones() {
            0 => {
                let o: Vec<usize> = occ(ket).collect();
                let mut e = 0.0;
                for &i in &o {
                    e += self.h(i, i);
                    for &j in &o {
                        e += 0.5 * self.anti(i, j, i, j);
                    }
                }
                e
            }
            2 => {
                let i = (ket & diff).trailing_zeros() as usize;
                let a = (bra & diff).trailing_zeros() as usize;
                let (sign, _) = apply_ops(ket, &[(false, i), (true, a)]).unwrap();
                let mut v = self.h(a, i);
                for j in occ(ket) {
                    v += self.anti(a, j, i, j);
                }
                sign * v
            }
            4 => {
                let holes: Vec<usize> = occ(ket & diff).collect();
                let parts: Vec<usize> = occ(bra & diff).collect();
                let (i, j) = (holes[0], holes[1]);
                let (a, b) = (parts[0], parts[1]);
                // a†_a a†_b a_j a_i |ket⟩
                let (sign, _) = apply_ops(ket, &[(false, i), (false, j), (true, b), (true, a)]).unwrap();
                sign * self.anti(a, b, i, j)
            }
            _ => 0.0,
        }
    }
}

// Applies (create?, index) operators right-to-left in the given order.
fn apply_ops(mut det: u64, ops: &[(bool, usize)]) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    for &(create, k) in ops {
        let occupied = det >> k & 1 == 1;
        if occupied == create {
            return None;
        }
        if (det & ((1u64 << k) - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        det ^= 1 << k;
    }
    Some((sign, det))
}

/// Sigma builder σ = Σ g_pq E_pq c + ½ Σ (pq|rs) E_pq E_rs c over (α, β) strings.
struct StringSigma {
    n: usize,
    nb: usize,
    g: Vec<f64>,
    v: DMatrix<f64>,
    // per string: (pq, target string index, sign)
    alpha_lists: Vec<Vec<(usize, usize, f64)>>,
    beta_lists: Vec<Vec<(usize, usize, f64)>>,
}

fn replacement_lists(strs: &[usize], n: usize) -> Vec<Vec<(usize, usize, f64)>> {
    let index: HashMap<usize, usize> = strs.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    strs.iter()
        .map(|&s| {
            let mut out = Vec::new();
            for p in 0..n {
                for q in 0..n {
                    if let Some((sign, t)) = apply_ops(s as u64, &[(false, q), (true, p)]) {
                        if let Some(&j) = index.get(&(t as usize)) {
                            out.push((p * n + q, j, sign));
                        }
                    }
                }
            }
            out
        })
        .collect()
}

impl StringSigma {
    fn new(sys: &MolecularSystem, alpha: &[usize], beta: &[usize]) -> Self {
        let n = sys.n_orb;
        let gm = sys.g_matrix();
        let g = (0..n * n).map(|x| gm[(x / n, x % n)]).collect();
        let v = DMatrix::from_fn(n * n, n * n, |a, b| {
            0.5 * sys.eri[[a / n, a % n, b / n, b % n]]
        });
        Self {
            n,
            nb: beta.len(),
            g,
            v,
            alpha_lists: replacement_lists(alpha, n),
            beta_lists: replacement_lists(beta, n),
        }
    }

    fn apply(&self, c: &DVector<f64>) -> DVector<f64> {
        let dim = c.len();
        let nn = self.n * self.n;
        let nb = self.nb;
        // d[(K, rs)] = Σ_I ⟨K|E_rs|I⟩ c_I
        let mut d = DMatrix::zeros(dim, nn);
        for (ia, alist) in self.alpha_lists.iter().enumerate() {
            for (ib, blist) in self.beta_lists.iter().enumerate() {
                let ci = c[ia * nb + ib];
                if ci == 0.0 {
                    continue;
                }
                for &(rs, ja, s) in alist {
                    d[(ja * nb + ib, rs)] += s * ci;
                }
                for &(rs, jb, s) in blist {
                    d[(ia * nb + jb, rs)] += s * ci;
                }
            }
        }
        let mut gm = &d * &self.v;
        for pq in 0..nn {
            let gpq = self.g[pq];
            if gpq != 0.0 {
                for k in 0..dim {
                    gm[(k, pq)] += gpq * c[k];
                }
            }
        }
        let mut sigma = DVector::zeros(dim);
        for (ka, alist) in self.alpha_lists.iter().enumerate() {
            for (kb, blist) in self.beta_lists.iter().enumerate() {
                let k = ka * nb + kb;
                for &(pq, ja, s) in alist {
                    sigma[ja * nb + kb] += s * gm[(k, pq)];
                }
                for &(pq, jb, s) in blist {
                    sigma[ka * nb + jb] += s * gm[(k, pq)];
                }
            }
        }
        sigma
    }
}

/// Lowest eigenpair of a symmetric operator; starts from `guess` or the lowest diagonal.
pub(crate) fn davidson(
    diag: &[f64],
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    guess: Option<&DVector<f64>>,
    residual_tol: f64,
    max_iter: usize,
) -> Result<(f64, DVector<f64>)> {
    let dim = diag.len();
    const MAX_SUB: usize = 40;
    let start = match guess {
        Some(g) if g.len() == dim && g.norm() > 0.0 => g.normalize(),
        _ => {
            let k = (0..dim).min_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap();
            DVector::from_fn(dim, |i, _| if i == k { 1.0 } else { 0.0 })
        }
    };
    let mut basis: Vec<DVector<f64>> = vec![start];
    let mut images: Vec<DVector<f64>> = vec![apply(&basis[0])];
    let mut theta = f64::NAN;
    for _ in 0..max_iter {
        let m = basis.len();
        let a = DMatrix::from_fn(m, m, |i, j| basis[i].dot(&images[j]));
        let a = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(a);
        let k = eig.eigenvalues.imin();
        theta = eig.eigenvalues[k];
        let y = eig.eigenvectors.column(k);
        let mut x = DVector::zeros(dim);
        let mut ax = DVector::zeros(dim);
        for i in 0..m {
            x.axpy(y[i], &basis[i], 1.0);
            ax.axpy(y[i], &images[i], 1.0);
        }
        let r = &ax - &x * theta;
        if r.norm() < residual_tol {
            return Ok((theta, x));
        }
        let mut t = DVector::from_fn(dim, |i, _| {
            let den = theta - diag[i];
            if den.abs() > 1e-8 { r[i] / den } else { r[i] / 1e-8 }
        });
        if basis.len() >= MAX_SUB {
            let xn = x.normalize();
            images = vec![apply(&xn)];
            basis = vec![xn];
        }
        for _ in 0..2 {
            for b in &basis {
                let ov = b.dot(&t);
                t.axpy(-ov, b, 1.0);
            }
        }
        let norm = t.norm();
        if norm < 1e-12 {
            return Ok((theta, x));
        }
        t /= norm;
        images.push(apply(&t));
        basis.push(t);
    }
    Err(Error::Spec(format!("Davidson did not converge (last eigenvalue {theta})")))
}
