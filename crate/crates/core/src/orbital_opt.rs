//! Orbital gradient and Hessian from spinless RDMs, level-shifted Newton steps,
//! and the rotate-and-reset integral update.
//!
//! The two-particle density enters as G[a][b][c][d] = ½⟨E_ab E_cd⟩ (see
//! [`SpinlessRdms`]). Contractions are written in einsum form: the first label
//! string indexes (pq|rs), the second indexes G.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::estimator::{assemble_spinless_rdms, RdmSet, SpinlessRdms};
use crate::integrals::{exp_antisymmetric, rotate_integrals, KappaMatrix, MolecularSystem};
use crate::tensor::Tensor4;

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalConfig {
    /// δ: smallest eigenvalue allowed in the shifted Hessian
    pub level_shift: f64,
    /// cap on ‖κ‖∞ in radians
    pub kappa_max: f64,
    pub max_halvings: usize,
}

impl Default for OrbitalConfig {
    fn default() -> Self {
        Self {
            level_shift: 1e-4,
            kappa_max: 0.25,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitalStepReport {
    pub omega: Vec<f64>,
    pub q: DMatrix<f64>,
    pub kappa: Vec<f64>,
    pub level_shift: f64,
    pub predicted_de: f64,
    /// energy change at fixed RDMs after the accepted rotation
    pub actual_de: f64,
    pub halvings: usize,
    pub rotation: DMatrix<f64>,
}

const LABELS: &[u8] = b"pqrsuvt";

fn slot(c: u8) -> usize {
    LABELS.iter().position(|&l| l == c).expect("unknown label")
}

struct Term {
    eri: &'static str,
    rdm: &'static str,
    /// Kronecker delta between two labels
    delta: Option<&'static str>,
    coef: f64,
}

const fn term(eri: &'static str, rdm: &'static str, coef: f64) -> Term {
    Term {
        eri,
        rdm,
        delta: None,
        coef,
    }
}

const fn dterm(delta: &'static str, eri: &'static str, rdm: &'static str, coef: f64) -> Term {
    Term {
        eri,
        rdm,
        delta: Some(delta),
        coef,
    }
}

const GRADIENT_TERMS: [Term; 4] = [
    term("uvtp", "uvtq", 1.0),
    term("uptv", "uqtv", 1.0),
    term("uvqt", "uvpt", -1.0),
    term("qvtu", "pvtu", -1.0),
];

const HESSIAN_TERMS: [Term; 20] = [
    term("utqr", "utps", -1.0),
    term("qutr", "puts", -1.0),
    term("urqt", "uspt", -1.0),
    term("qrtu", "pstu", -1.0),
    term("utsp", "utrq", -1.0),
    term("upst", "uqrt", -1.0),
    term("sutp", "rutq", -1.0),
    term("sptu", "rqtu", -1.0),
    term("upvr", "uqvs", 1.0),
    // printed in the source expression as (ur|vq); only (ur|vp) carries the p index
    // and reproduces the finite-difference Hessian
    term("urvp", "usvq", 1.0),
    term("qvsu", "pvru", 1.0),
    term("svqu", "rvpu", 1.0),
    dterm("qr", "uvtp", "uvts", 0.5),
    dterm("qr", "uptv", "ustv", 0.5),
    dterm("qr", "uvst", "uvpt", 0.5),
    dterm("qr", "svtu", "pvtu", 0.5),
    dterm("ps", "uvqt", "uvrt", 0.5),
    dterm("ps", "qvtu", "rvtu", 0.5),
    dterm("ps", "uvtr", "uvtq", 0.5),
    dterm("ps", "urtv", "uqtv", 0.5),
];

/// Accumulates coef·Σ eri·G over the nonzero entries of G into `out`, indexed by `out_labels`.
fn contract(out: &mut [f64], out_labels: &str, n: usize, eri: &Tensor4, gnz: &[([usize; 4], f64)], t: &Term) {
    let eri_s: Vec<usize> = t.eri.bytes().map(slot).collect();
    let rdm_s: Vec<usize> = t.rdm.bytes().map(slot).collect();
    let out_s: Vec<usize> = out_labels.bytes().map(slot).collect();
    let delta = t.delta.map(|d| {
        let b: Vec<usize> = d.bytes().map(slot).collect();
        (b[0], b[1])
    });
    const FREE: usize = usize::MAX;
    for &(idx, gval) in gnz {
        let mut val = [FREE; 7];
        let mut ok = true;
        for k in 0..4 {
            let s = rdm_s[k];
            if val[s] == FREE {
                val[s] = idx[k];
            } else if val[s] != idx[k] {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut tied = None;
        if let Some((a, b)) = delta {
            match (val[a] == FREE, val[b] == FREE) {
                (false, false) if val[a] != val[b] => continue,
                (false, true) => val[b] = val[a],
                (true, false) => val[a] = val[b],
                (true, true) => tied = Some((a, b)),
                _ => {}
            }
        }
        let mut free: Vec<usize> = Vec::new();
        for &s in eri_s.iter().chain(&out_s) {
            if val[s] == FREE && !free.contains(&s) && tied.map_or(true, |(_, b)| b != s) {
                free.push(s);
            }
        }
        let combos = n.pow(free.len() as u32);
        for mut c in 0..combos {
            for &s in &free {
                val[s] = c % n;
                c /= n;
            }
            if let Some((a, b)) = tied {
                val[b] = val[a];
            }
            let e = eri[[val[eri_s[0]], val[eri_s[1]], val[eri_s[2]], val[eri_s[3]]]];
            if e == 0.0 {
                continue;
            }
            let mut o = 0;
            for &s in &out_s {
                o = o * n + val[s];
            }
            out[o] += t.coef * gval * e;
        }
    }
}

fn check_dims(rdms: &SpinlessRdms, sys: &MolecularSystem) -> Result<()> {
    if rdms.n_orb() != sys.n_orb || rdms.gamma2.dim() != sys.n_orb {
        return Err(Error::Dimension(format!(
            "RDMs on {} orbitals, integrals on {}",
            rdms.n_orb(),
            sys.n_orb
        )));
    }
    Ok(())
}

/// ω_x = ∂E/∂κ_x at κ = 0, packed by the lower-triangle convention.
pub fn orbital_gradient(rdms: &SpinlessRdms, sys: &MolecularSystem) -> Result<Vec<f64>> {
    check_dims(rdms, sys)?;
    let n = sys.n_orb;
    let g = sys.g_matrix();
    let gam = &rdms.gamma1;
    let mut w = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            w[p * n + q] += (0..n)
                .map(|u| g[(u, p)] * gam[(u, q)] - g[(q, u)] * gam[(p, u)])
                .sum::<f64>();
        }
    }
    let gnz: Vec<_> = rdms.gamma2.iter_nonzero().collect();
    for t in &GRADIENT_TERMS {
        contract(&mut w, "pq", n, &sys.eri, &gnz, t);
    }
    Ok(KappaMatrix::pairs(n)
        .into_iter()
        .map(|(p, q)| w[p * n + q] - w[q * n + p])
        .collect())
}

pub(crate) fn orbital_hessian_unsymmetrized(rdms: &SpinlessRdms, sys: &MolecularSystem) -> Result<DMatrix<f64>> {
    check_dims(rdms, sys)?;
    let n = sys.n_orb;
    let g = sys.g_matrix();
    let gam = &rdms.gamma1;
    let at = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    let mut x = vec![0.0; n * n * n * n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let mut v = -(g[(s, p)] * gam[(q, r)] + g[(p, s)] * gam[(r, q)]);
                    if q == r {
                        v += 0.5 * (0..n).map(|t| g[(t, p)] * gam[(t, s)] + g[(s, t)] * gam[(p, t)]).sum::<f64>();
                    }
                    if p == s {
                        v += 0.5 * (0..n).map(|t| g[(q, t)] * gam[(r, t)] + g[(t, r)] * gam[(t, q)]).sum::<f64>();
                    }
                    x[at(p, q, r, s)] = v;
                }
            }
        }
    }
    let gnz: Vec<_> = rdms.gamma2.iter_nonzero().collect();
    for t in &HESSIAN_TERMS {
        contract(&mut x, "pqrs", n, &sys.eri, &gnz, t);
    }
    let pairs = KappaMatrix::pairs(n);
    let d = pairs.len();
    Ok(DMatrix::from_fn(d, d, |a, b| {
        let (p, q) = pairs[a];
        let (r, s) = pairs[b];
        x[at(p, q, r, s)] - x[at(q, p, r, s)] - x[at(p, q, s, r)] + x[at(q, p, s, r)]
    }))
}

/// Q_xy = ∂²E/∂κ_x∂κ_y at κ = 0.
pub fn orbital_hessian(rdms: &SpinlessRdms, sys: &MolecularSystem) -> Result<DMatrix<f64>> {
    let q = orbital_hessian_unsymmetrized(rdms, sys)?;
    Ok((&q + q.transpose()) * 0.5)
}

#[derive(Debug, Clone)]
pub struct NewtonStep {
    pub kappa: KappaMatrix,
    pub level_shift: f64,
    pub predicted_de: f64,
}

/// Solves (Q + λI)κ = −ω with λ = max(0, δ − λ_min(Q)) and caps ‖κ‖∞ at κ_max.
pub fn newton_step(omega: &[f64], q: &DMatrix<f64>, cfg: &OrbitalConfig) -> Result<NewtonStep> {
    let d = omega.len();
    if q.nrows() != d || q.ncols() != d {
        return Err(Error::Dimension(format!("ω has {d} entries, Q is {}x{}", q.nrows(), q.ncols())));
    }
    let n = ((1.0 + (1.0 + 8.0 * d as f64).sqrt()) / 2.0).round() as usize;
    if d == 0 || omega.iter().all(|&w| w == 0.0) {
        return Ok(NewtonStep {
            kappa: KappaMatrix::zeros(n),
            level_shift: 0.0,
            predicted_de: 0.0,
        });
    }
    let lmin = SymmetricEigen::new(q.clone()).eigenvalues.min();
    let mut lambda = (cfg.level_shift - lmin).max(0.0);
    let w = DVector::from_column_slice(omega);
    let mut attempt = 0;
    let mut step = loop {
        let shifted = q + DMatrix::identity(d, d) * lambda;
        if let Some(ch) = shifted.cholesky() {
            break -ch.solve(&w);
        }
        attempt += 1;
        if attempt > 3 {
            return Err(Error::SingularHessian);
        }
        lambda = if lambda > 0.0 { lambda * 10.0 } else { cfg.level_shift };
    };
    let largest = step.amax();
    if largest > cfg.kappa_max {
        step *= cfg.kappa_max / largest;
    }
    let predicted_de = w.dot(&step) + 0.5 * step.dot(&(q * &step));
    Ok(NewtonStep {
        kappa: KappaMatrix::from_packed(n, step.as_slice())?,
        level_shift: lambda,
        predicted_de,
    })
}

/// One Newton step on the orbitals, absorbed into the integrals. The step cap is
/// halved until the energy at fixed RDMs does not increase.
pub fn oo_iteration(
    sys: &MolecularSystem,
    rdms: &SpinlessRdms,
    cfg: &OrbitalConfig,
) -> Result<(MolecularSystem, OrbitalStepReport)> {
    let n = sys.n_orb;
    let omega = orbital_gradient(rdms, sys)?;
    let q = orbital_hessian(rdms, sys)?;
    let e0 = rdms.energy(sys);
    let mut local = cfg.clone();
    let mut halvings = 0;
    loop {
        let step = newton_step(&omega, &q, &local)?;
        let c = exp_antisymmetric(&step.kappa);
        let rotated = if step.kappa.k.iter().all(|&v| v == 0.0) {
            sys.clone()
        } else {
            rotate_integrals(sys, &c)?
        };
        let de = rdms.energy(&rotated) - e0;
        let give_up = halvings >= cfg.max_halvings;
        if de <= 1e-12 || give_up {
            let (rotated, kappa, c, de) = if de > 1e-12 {
                (sys.clone(), vec![0.0; omega.len()], DMatrix::identity(n, n), 0.0)
            } else {
                (rotated, step.kappa.packed(), c, de)
            };
            let report = OrbitalStepReport {
                omega,
                q,
                kappa,
                level_shift: step.level_shift,
                predicted_de: step.predicted_de,
                actual_de: de,
                halvings,
                rotation: c,
            };
            return Ok((rotated, report));
        }
        local.kappa_max *= 0.5;
        halvings += 1;
    }
}

/// Linear-propagation standard error of each ω component, treating the per-orbital,
/// per-pair and pair-hop estimators as independent.
pub fn gradient_stderr(rdms: &RdmSet, sys: &MolecularSystem) -> Result<Vec<f64>> {
    let n = rdms.n_orb();
    let mut var = vec![0.0; KappaMatrix::n_params(n)];
    let mut add = |unit: RdmSet, sigma: f64| -> Result<()> {
        if sigma == 0.0 {
            return Ok(());
        }
        let d = orbital_gradient(&assemble_spinless_rdms(&unit), sys)?;
        for (v, x) in var.iter_mut().zip(d) {
            *v += (x * sigma).powi(2);
        }
        Ok(())
    };
    for p in 0..n {
        let mut u = RdmSet::zeros(n);
        u.z[p] = 1.0;
        u.gam[(p, p)] = 1.0;
        u.del[(p, p)] = 0.5;
        add(u, rdms.z_err[p])?;
        for q in (p + 1)..n {
            let mut u = RdmSet::zeros(n);
            for (a, b) in [(p, q), (q, p)] {
                u.gam[(a, b)] = 2.0;
                u.del[(a, b)] = 1.0;
            }
            add(u, rdms.pair_err[(p, q)])?;
            let mut u = RdmSet::zeros(n);
            u.phop[(p, q)] = 1.0;
            u.phop[(q, p)] = 1.0;
            add(u, rdms.phop_err[(p, q)])?;
        }
    }
    Ok(var.into_iter().map(f64::sqrt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_gives_zero_step() {
        let q = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let s = newton_step(&[0.0; 3], &q, &OrbitalConfig::default()).unwrap();
        assert!(s.kappa.k.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_step() {
        let q = DMatrix::from_element(1, 1, 2.0);
        let s = newton_step(&[0.5], &q, &OrbitalConfig::default()).unwrap();
        assert!((s.kappa.packed()[0] + 0.25).abs() < 1e-15);
        assert_eq!(s.level_shift, 0.0);
    }

    #[test]
    fn indefinite_hessian_gives_descent() {
        let q = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, -0.5, 0.1, 0.0, 0.1, 2.0]);
        let w = [0.2, -0.1, 0.05];
        let s = newton_step(&w, &q, &OrbitalConfig::default()).unwrap();
        let k = s.kappa.packed();
        let dot: f64 = w.iter().zip(&k).map(|(a, b)| a * b).sum();
        assert!(dot < 0.0);
        assert!(s.level_shift > 0.5);
        assert!(k.iter().all(|v| v.abs() <= 0.25 + 1e-15));
        assert!(s.predicted_de < 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let q = DMatrix::from_element(1, 1, 2.0);
        assert!(newton_step(&[0.5, 0.1, 0.0], &q, &OrbitalConfig::default()).is_err());
    }
}
