mod common;

use nalgebra::{DMatrix, DVector};
use pairvqe::ansatz::{build_upccd_circuit, PairAnsatz};
use pairvqe::estimator::{assemble_spinless_rdms, exact_rdms, SpinlessRdms};
use pairvqe::integrals::{build_seniority_zero, exp_antisymmetric, rotate_integrals, KappaMatrix, MolecularSystem};
use pairvqe::oracle::{doci_ground_state, energy_at_kappa, fd_gradient_check, fd_hessian, fock, pair_vector_rdms, random_system, PairBasis};
use pairvqe::orbital_opt::{oo_iteration, orbital_gradient, orbital_hessian, OrbitalConfig};
use pairvqe::rng::{stream_rng, SimRng};
use pairvqe::simulator::{run_circuit, StateVector};
use rand::Rng;

fn random_pair_rdms(n: usize, pairs: usize, rng: &mut SimRng) -> SpinlessRdms {
    let basis = PairBasis::new(n, pairs);
    let psi = DVector::from_fn(basis.len(), |_, _| rng.gen_range(-1.0..1.0)).normalize();
    assemble_spinless_rdms(&pair_vector_rdms(&basis, &psi))
}

fn sizes() -> [(usize, usize); 4] {
    [(2, 1), (3, 1), (4, 2), (6, 3)]
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = stream_rng(30, 0);
    for (n, pairs) in sizes() {
        for _ in 0..20 {
            let sys = random_system(n, 2 * pairs, &mut rng);
            let rdms = random_pair_rdms(n, pairs, &mut rng);
            let rep = fd_gradient_check(&sys, &rdms, 1e-4).unwrap();
            assert!(rep.max_rel_err < 1e-5, "n={n}: {}", rep.max_rel_err);
        }
    }
}

#[test]
fn hessian_matches_second_differences() {
    let mut rng = stream_rng(31, 0);
    for (n, pairs) in sizes() {
        for _ in 0..20 {
            let sys = random_system(n, 2 * pairs, &mut rng);
            let rdms = random_pair_rdms(n, pairs, &mut rng);
            let q = orbital_hessian(&rdms, &sys).unwrap();
            assert!((&q - q.transpose()).abs().max() < 1e-8);
            let fd = fd_hessian(&sys, &rdms, 1e-4).unwrap();
            let rel = (&q - &fd).abs().max() / fd.abs().max().max(1e-12);
            assert!(rel < 1e-4, "n={n}: {rel}");
        }
    }
}

#[test]
fn hessian_is_the_gradient_jacobian() {
    let mut rng = stream_rng(32, 0);
    let sys = random_system(4, 4, &mut rng);
    let rdms = random_pair_rdms(4, 2, &mut rng);
    let q = orbital_hessian(&rdms, &sys).unwrap();
    let d = KappaMatrix::n_params(4);
    let h = 1e-5;
    for x in 0..d {
        let mut k = vec![0.0; d];
        k[x] = h;
        let gp = orbital_gradient(&rdms, &rotate_integrals(&sys, &exp_antisymmetric(&KappaMatrix::from_packed(4, &k).unwrap())).unwrap()).unwrap();
        k[x] = -h;
        let gm = orbital_gradient(&rdms, &rotate_integrals(&sys, &exp_antisymmetric(&KappaMatrix::from_packed(4, &k).unwrap())).unwrap()).unwrap();
        // at κ = 0 the symmetrized Jacobian of ω is Q; compare the symmetric part column by column
        for y in 0..d {
            let jac = (gp[y] - gm[y]) / (2.0 * h);
            let jac_t = {
                let mut k2 = vec![0.0; d];
                k2[y] = h;
                let a = orbital_gradient(&rdms, &rotate_integrals(&sys, &exp_antisymmetric(&KappaMatrix::from_packed(4, &k2).unwrap())).unwrap()).unwrap()[x];
                k2[y] = -h;
                let b = orbital_gradient(&rdms, &rotate_integrals(&sys, &exp_antisymmetric(&KappaMatrix::from_packed(4, &k2).unwrap())).unwrap()).unwrap()[x];
                (a - b) / (2.0 * h)
            };
            assert!((0.5 * (jac + jac_t) - q[(x, y)]).abs() < 1e-5 * q.abs().max().max(1.0));
        }
    }
}

#[test]
fn symmetric_direction_has_zero_gradient() {
    // orbitals 1 and 2 are exchanged by a symmetry of the integrals and equally occupied
    let mut rng = stream_rng(33, 0);
    let base = random_system(3, 2, &mut rng);
    let perm = [0usize, 2, 1];
    let mut h = base.h.clone();
    let mut eri = base.eri.clone();
    for p in 0..3 {
        for q in 0..3 {
            h[(p, q)] = 0.5 * (base.h[(p, q)] + base.h[(perm[p], perm[q])]);
            for r in 0..3 {
                for s in 0..3 {
                    eri[[p, q, r, s]] = 0.5 * (base.eri[[p, q, r, s]] + base.eri[[perm[p], perm[q], perm[r], perm[s]]]);
                }
            }
        }
    }
    let sys = MolecularSystem::new(2, base.e_const, h, eri).unwrap();
    let basis = PairBasis::new(3, 1);
    let psi = DVector::from_vec(vec![0.9, 0.3, 0.3]).normalize();
    let rdms = assemble_spinless_rdms(&pair_vector_rdms(&basis, &psi));
    let omega = orbital_gradient(&rdms, &sys).unwrap();
    // packed order (1,0), (2,0), (2,1)
    assert!(omega[2].abs() < 1e-12, "{omega:?}");
    let rep = fd_gradient_check(&sys, &rdms, 1e-4).unwrap();
    assert!(rep.finite_difference[2].abs() < 1e-8);
}

#[test]
fn finite_difference_error_is_smallest_at_interior_step() {
    let mut rng = stream_rng(34, 0);
    let sys = random_system(4, 4, &mut rng);
    let rdms = random_pair_rdms(4, 2, &mut rng);
    let errs: Vec<f64> = [1e-2, 1e-4, 1e-7]
        .iter()
        .map(|&h| fd_gradient_check(&sys, &rdms, h).unwrap().max_rel_err)
        .collect();
    assert!(errs[1] < errs[0] && errs[1] < errs[2], "{errs:?}");
}

#[test]
fn rotated_integrals_equal_transformed_hamiltonian() {
    let mut rng = stream_rng(35, 0);
    let n = 3;
    let sys = random_system(n, 2, &mut rng);
    let k = KappaMatrix::from_packed(n, &[0.3, -0.2, 0.5]).unwrap();
    let c = exp_antisymmetric(&k);
    let rotated = rotate_integrals(&sys, &c).unwrap();
    let kop = fock::one_body(n, &k.k);
    let u = kop.exp();
    let h_full = fock::hamiltonian(&sys);
    let h_rot = fock::hamiltonian(&rotated);
    let transformed = u.transpose() * &h_full * &u;
    for _ in 0..5 {
        let coeffs: Vec<(usize, f64)> = [0b001, 0b010, 0b100].iter().map(|&b| (b, rng.gen_range(-1.0..1.0))).collect();
        let psi = fock::pair_state(n, &coeffs).normalize();
        let e1 = (psi.transpose() * &h_rot * &psi)[(0, 0)];
        let e2 = (psi.transpose() * &transformed * &psi)[(0, 0)];
        assert!((e1 - e2).abs() < 1e-9, "{e1} vs {e2}");
    }
    // the whole operator agrees, not just its pair-sector expectation values
    assert!((h_rot - transformed).abs().max() < 1e-9);
}

#[test]
fn accepted_steps_never_raise_the_energy_on_stretched_water() {
    let sys = common::system("h2o", 2.0);
    let a = PairAnsatz::for_system(&sys).unwrap();
    let mut rng = stream_rng(36, 0);
    let mut cur = sys.clone();
    for _ in 0..6 {
        let t: Vec<f64> = (0..a.n_params()).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let st = run_circuit(&StateVector::zero(6), &build_upccd_circuit(&a.with_params(&t).unwrap())).unwrap();
        let rdms = assemble_spinless_rdms(&exact_rdms(&st).unwrap());
        let e0 = rdms.energy(&cur);
        let (next, rep) = oo_iteration(&cur, &rdms, &OrbitalConfig::default()).unwrap();
        assert!(rep.actual_de <= 1e-12);
        assert!((rdms.energy(&next) - e0 - rep.actual_de).abs() < 1e-9);
        assert!(rep.kappa.iter().all(|v| v.abs() <= 0.25 + 1e-12));
        cur = next;
    }
}

#[test]
fn one_newton_step_on_stretched_water_recovers_tens_of_millihartree() {
    let sys = common::system("h2o", 2.0);
    let (_, psi, basis) = doci_ground_state(&build_seniority_zero(&sys), sys.n_pairs()).unwrap();
    let rdms = assemble_spinless_rdms(&pair_vector_rdms(&basis, &psi));
    let (_, rep) = oo_iteration(&sys, &rdms, &OrbitalConfig::default()).unwrap();
    // measured: about −22.7 mHa
    assert!(rep.actual_de < -0.020, "{}", rep.actual_de);
}

#[test]
fn kappa_round_trip_energy() {
    let mut rng = stream_rng(37, 0);
    let sys = random_system(4, 4, &mut rng);
    let rdms = random_pair_rdms(4, 2, &mut rng);
    let d = KappaMatrix::n_params(4);
    let kappa: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.2..0.2)).collect();
    let c = exp_antisymmetric(&KappaMatrix::from_packed(4, &kappa).unwrap());
    let direct = rdms.energy(&rotate_integrals(&sys, &c).unwrap());
    assert!((energy_at_kappa(&sys, &rdms, &kappa).unwrap() - direct).abs() < 1e-12);
    let back = rotate_integrals(&rotate_integrals(&sys, &c).unwrap(), &c.transpose()).unwrap();
    assert!((back.h.clone() - &sys.h).abs().max() < 1e-12);
    assert!(back.eri.max_abs_diff(&sys.eri) < 1e-12);
    let _ = DMatrix::<f64>::identity(1, 1);
}
