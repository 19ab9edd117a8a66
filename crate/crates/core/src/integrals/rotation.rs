use nalgebra::DMatrix;

use super::MolecularSystem;
use crate::error::{Error, Result};

/// Antisymmetric orbital-rotation generator. The packed vector runs over the
/// strict lower triangle, p outer and q inner (p > q), with K[p][q] = κ.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaMatrix {
    pub k: DMatrix<f64>,
}

impl KappaMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            k: DMatrix::zeros(n, n),
        }
    }

    pub fn n_params(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    /// (p, q) pairs in packing order.
    pub fn pairs(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|p| (0..p).map(move |q| (p, q))).collect()
    }

    pub fn from_packed(n: usize, kappa: &[f64]) -> Result<Self> {
        if kappa.len() != Self::n_params(n) {
            return Err(Error::Dimension(format!(
                "κ has length {}, expected {}",
                kappa.len(),
                Self::n_params(n)
            )));
        }
        let mut k = DMatrix::zeros(n, n);
        for (x, (p, q)) in Self::pairs(n).into_iter().enumerate() {
            k[(p, q)] = kappa[x];
            k[(q, p)] = -kappa[x];
        }
        Ok(Self { k })
    }

    pub fn packed(&self) -> Vec<f64> {
        Self::pairs(self.k.nrows())
            .into_iter()
            .map(|(p, q)| self.k[(p, q)])
            .collect()
    }
}

/// exp(K) by scaling and squaring with a Taylor series.
pub fn exp_antisymmetric(kappa: &KappaMatrix) -> DMatrix<f64> {
    let k = &kappa.k;
    let n = k.nrows();
    let norm = k.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.25 {
        squarings += 1;
    }
    let a = k / f64::powi(2.0, squarings);
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for j in 1..=30 {
        term = &term * &a / j as f64;
        result += &term;
        if term.abs().max() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// max |CᵀC − I|
pub fn orthogonality_residual(c: &DMatrix<f64>) -> f64 {
    let n = c.ncols();
    (c.transpose() * c - DMatrix::<f64>::identity(n, n)).abs().max()
}

/// h' = Cᵀ h C and (pq|rs)' = Σ C_ap C_bq C_cr C_ds (ab|cd).
pub fn rotate_integrals(sys: &MolecularSystem, c: &DMatrix<f64>) -> Result<MolecularSystem> {
    if c.nrows() != sys.n_orb || c.ncols() != sys.n_orb {
        return Err(Error::Dimension(format!(
            "rotation is {}x{}, system has {} orbitals",
            c.nrows(),
            c.ncols(),
            sys.n_orb
        )));
    }
    let res = orthogonality_residual(c);
    if res > 1e-8 {
        return Err(Error::NotOrthogonal(res));
    }
    let mut h = c.transpose() * &sys.h * c;
    // remove round-off asymmetry
    h = (&h + h.transpose()) * 0.5;
    Ok(MolecularSystem {
        n_orb: sys.n_orb,
        n_elec: sys.n_elec,
        e_const: sys.e_const,
        h,
        eri: sys.eri.transform(c),
    })
}
