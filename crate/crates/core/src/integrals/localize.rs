//! Edmiston-Ruedenberg localization inside the occupied and virtual spaces.
//! Neither space mixes with the other, so the closed-shell reference energy is unchanged.

use nalgebra::DMatrix;

use super::{rotate_integrals, MolecularSystem};
use crate::tensor::Tensor4;

const MAX_SWEEPS: usize = 200;

/// Returns the orthogonal C that maximizes Σ_p (pp|pp) within each of the two spaces
/// (orbitals 0..n_pairs and n_pairs..n_orb) by Jacobi sweeps.
pub fn localize_pair_spaces(sys: &MolecularSystem) -> DMatrix<f64> {
    let n = sys.n_orb;
    let occ: Vec<usize> = (0..sys.n_pairs()).collect();
    let virt: Vec<usize> = (sys.n_pairs()..n).collect();
    let mut total = DMatrix::identity(n, n);
    let mut eri = sys.eri.clone();
    for space in [occ, virt] {
        let c = jacobi_sweeps(&mut eri, &space);
        total = total * c;
    }
    total
}

fn jacobi_sweeps(eri: &mut Tensor4, idx: &[usize]) -> DMatrix<f64> {
    let n = eri.dim();
    let mut total = DMatrix::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut largest = 0.0f64;
        for a in 0..idx.len() {
            for b in 0..a {
                let (p, q) = (idx[a], idx[b]);
                let f = |th: f64| self_repulsion(eri, p, q, th);
                let (f0, f1, f2) = (f(0.0), f(std::f64::consts::FRAC_PI_8), f(std::f64::consts::FRAC_PI_4));
                // f(θ) = A + B cos4θ + C sin4θ
                let a0 = 0.5 * (f0 + f2);
                let b0 = 0.5 * (f0 - f2);
                let c0 = f1 - a0;
                let th = c0.atan2(b0) / 4.0;
                if th.abs() > 1e-10 {
                    let r = pair_rotation(n, p, q, th);
                    *eri = eri.transform(&r);
                    total *= r;
                    largest = largest.max(th.abs());
                }
            }
        }
        if largest < 1e-9 {
            break;
        }
    }
    total
}

fn pair_rotation(n: usize, p: usize, q: usize, th: f64) -> DMatrix<f64> {
    let (s, c) = th.sin_cos();
    let mut r = DMatrix::identity(n, n);
    r[(p, p)] = c;
    r[(q, q)] = c;
    r[(p, q)] = -s;
    r[(q, p)] = s;
    r
}

// (p'p'|p'p') + (q'q'|q'q') after rotating the pair by θ.
fn self_repulsion(eri: &Tensor4, p: usize, q: usize, th: f64) -> f64 {
    let (s, c) = th.sin_cos();
    let ids = [p, q];
    let new_p = [c, s];
    let new_q = [-s, c];
    let mut total = 0.0;
    for v in [new_p, new_q] {
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        total += v[a] * v[b] * v[cc] * v[d] * eri[[ids[a], ids[b], ids[cc], ids[d]]];
                    }
                }
            }
        }
    }
    total
}

/// Convenience: the localized system together with its rotation.
pub fn localized_system(sys: &MolecularSystem) -> (MolecularSystem, DMatrix<f64>) {
    let c = localize_pair_spaces(sys);
    let out = rotate_integrals(sys, &c).expect("Jacobi rotations are orthogonal");
    (out, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::orthogonality_residual;
    use crate::oracle::random_system;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn keeps_reference_energy_and_raises_self_repulsion() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sys = random_system(6, 6, &mut rng);
        let (loc, c) = localized_system(&sys);
        assert!(orthogonality_residual(&c) < 1e-12);
        assert!((loc.hf_energy() - sys.hf_energy()).abs() < 1e-10);
        let sr = |s: &MolecularSystem| (0..6).map(|p| s.eri[[p, p, p, p]]).sum::<f64>();
        assert!(sr(&loc) >= sr(&sys) - 1e-12);
        for i in 0..3 {
            for a in 3..6 {
                assert!(c[(i, a)].abs() < 1e-14 && c[(a, i)].abs() < 1e-14);
            }
        }
    }
}
