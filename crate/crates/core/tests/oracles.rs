mod common;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use pairvqe::estimator::{assemble_spinless_rdms, exact_rdms, SpinlessRdms};
use pairvqe::integrals::{
    build_seniority_zero, exp_antisymmetric, fold_frozen_core, rotate_integrals, KappaMatrix, MolecularSystem,
};
use pairvqe::oracle::{
    doci_ground_state, fci_ground_state, fci_ground_state_with, fock, oo_doci, oo_doci_from, rdm_oracle,
    random_system, FciOptions, OoDociConfig, PairBasis,
};
use pairvqe::rng::{stream_rng, SimRng};
use pairvqe::simulator::StateVector;
use pairvqe::tensor::Tensor4;
use rand::Rng;

fn pair_statevector(basis: &PairBasis, psi: &DVector<f64>) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << basis.n_orb];
    for (i, &b) in basis.states.iter().enumerate() {
        amps[b] = Complex64::new(psi[i], 0.0);
    }
    StateVector::from_amplitudes(amps).unwrap()
}

fn random_pair_vector(basis: &PairBasis, rng: &mut SimRng) -> DVector<f64> {
    DVector::from_fn(basis.len(), |_, _| rng.gen_range(-1.0..1.0)).normalize()
}

fn sector_ground(sys: &MolecularSystem, na: usize, nb: usize) -> f64 {
    let full = fock::hamiltonian(sys);
    let idx = fock::sector(sys.n_orb, na, nb);
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| full[(idx[i], idx[j])]);
    SymmetricEigen::new(sub).eigenvalues.min()
}

fn permuted(sys: &MolecularSystem, perm: &[usize]) -> MolecularSystem {
    let n = sys.n_orb;
    let h = DMatrix::from_fn(n, n, |p, q| sys.h[(perm[p], perm[q])]);
    let mut eri = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    eri[[p, q, r, s]] = sys.eri[[perm[p], perm[q], perm[r], perm[s]]];
                }
            }
        }
    }
    MolecularSystem::new(sys.n_elec, sys.e_const, h, eri).unwrap()
}

fn max_tensor_diff(a: &SpinlessRdms, b: &SpinlessRdms) -> f64 {
    (&a.gamma1 - &b.gamma1).abs().max().max(a.gamma2.max_abs_diff(&b.gamma2))
}

#[test]
fn slater_condon_matches_second_quantized_matrix() {
    let mut rng = stream_rng(40, 0);
    for (n, na, nb) in [(2, 1, 1), (2, 2, 1), (2, 1, 0), (3, 1, 1), (3, 2, 1), (3, 2, 2), (3, 3, 1)] {
        for _ in 0..3 {
            let sys = random_system(n, 2, &mut rng);
            let sc = fci_ground_state(&sys, na, nb).unwrap();
            let sq = sector_ground(&sys, na, nb);
            assert!((sc - sq).abs() < 1e-10, "n={n} {na}/{nb}: {sc} vs {sq}");
        }
    }
}

#[test]
fn fci_is_invariant_under_orbital_rotation() {
    let mut rng = stream_rng(41, 0);
    let sys = random_system(4, 4, &mut rng);
    let d = KappaMatrix::n_params(4);
    let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let c = exp_antisymmetric(&KappaMatrix::from_packed(4, &k).unwrap());
    let e0 = fci_ground_state(&sys, 2, 2).unwrap();
    let e1 = fci_ground_state(&rotate_integrals(&sys, &c).unwrap(), 2, 2).unwrap();
    assert!((e0 - e1).abs() < 1e-8);
}

#[test]
fn h2_fci_equals_doci() {
    let sys = common::system("h2", 0.74);
    let fci = fci_ground_state(&sys, 1, 1).unwrap();
    let (doci, _, _) = doci_ground_state(&build_seniority_zero(&sys), 1).unwrap();
    let oo = oo_doci(&sys, &OoDociConfig::standard(&sys)).unwrap();
    assert!((fci - doci).abs() < 1e-10, "{fci} vs {doci}");
    assert!((fci - oo.energy).abs() < 1e-10, "{fci} vs {}", oo.energy);
}

#[test]
fn frozen_core_constraint_equals_folded_space() {
    let mut rng = stream_rng(42, 0);
    for _ in 0..3 {
        let sys = random_system(4, 4, &mut rng);
        let opts = FciOptions {
            core: vec![0],
            ..FciOptions::default()
        };
        let constrained = fci_ground_state_with(&sys, 2, 2, &opts).unwrap();
        let folded = fci_ground_state(&fold_frozen_core(&sys, &[0]).unwrap(), 1, 1).unwrap();
        assert!((constrained - folded).abs() < 1e-10, "{constrained} vs {folded}");
        // freezing can only raise the energy
        assert!(fci_ground_state(&sys, 2, 2).unwrap() <= constrained + 1e-12);
    }
}

#[test]
fn rdm_oracle_certifies_assembled_rdms() {
    let mut rng = stream_rng(43, 0);
    for (n, k) in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3)] {
        let basis = PairBasis::new(n, k);
        for _ in 0..5 {
            let psi = random_pair_vector(&basis, &mut rng);
            let st = pair_statevector(&basis, &psi);
            let oracle = rdm_oracle(&st, n).unwrap();
            let assembled = assemble_spinless_rdms(&exact_rdms(&st).unwrap());
            assert!(max_tensor_diff(&oracle, &assembled) < 1e-12);
            let n_elec = 2.0 * k as f64;
            assert!((oracle.gamma1.trace() - n_elec).abs() < 1e-12);
            // Σ_pr ½⟨E_pp E_rr⟩ = ½ N²
            let two: f64 = (0..n).flat_map(|p| (0..n).map(move |r| (p, r))).map(|(p, r)| oracle.gamma2[[p, p, r, r]]).sum();
            assert!((two - 0.5 * n_elec * n_elec).abs() < 1e-12);
            let sys = random_system(n, 2 * k, &mut rng);
            assert!((oracle.energy(&sys) - assembled.energy(&sys)).abs() < 1e-12);
        }
    }
}

#[test]
fn hf_determinant_rdms_closed_form() {
    let n = 4;
    let occ = [true, true, false, false];
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[0b0011] = Complex64::new(1.0, 0.0);
    let rdms = rdm_oracle(&StateVector::from_amplitudes(amps).unwrap(), n).unwrap();
    for p in 0..n {
        for q in 0..n {
            let g1 = if p == q && occ[p] { 2.0 } else { 0.0 };
            assert_eq!(rdms.gamma1[(p, q)], g1);
            for r in 0..n {
                for s in 0..n {
                    let want = if p == q && r == s && occ[p] && occ[r] {
                        2.0
                    } else if p == s && q == r && p != q && occ[p] && !occ[q] {
                        1.0
                    } else {
                        0.0
                    };
                    assert!((rdms.gamma2[[p, q, r, s]] - want).abs() < 1e-14, "{p}{q}{r}{s}");
                }
            }
        }
    }
}

#[test]
fn doci_is_invariant_under_orbital_permutation() {
    let mut rng = stream_rng(44, 0);
    let sys = random_system(5, 4, &mut rng);
    let (e0, _, _) = doci_ground_state(&build_seniority_zero(&sys), 2).unwrap();
    for perm in [[4, 3, 2, 1, 0], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3]] {
        let (e1, _, _) = doci_ground_state(&build_seniority_zero(&permuted(&sys, &perm)), 2).unwrap();
        assert!((e0 - e1).abs() < 1e-10);
    }
}

#[test]
fn pair_diagonal_matches_fock_space_diagonal() {
    let mut rng = stream_rng(45, 0);
    let n = 4;
    let sys = random_system(n, 4, &mut rng);
    let hsz = build_seniority_zero(&sys);
    let full = fock::hamiltonian(&sys);
    for b in 0usize..1 << n {
        let v = fock::pair_state(n, &[(b, 1.0)]);
        let e = (v.transpose() * &full * &v)[(0, 0)];
        assert!((e - hsz.diagonal(b as u64)).abs() < 1e-10, "b={b:04b}");
    }
    // the pair-hop matrix elements too
    let basis = PairBasis::new(n, 2);
    let dense = pairvqe::oracle::pair_hamiltonian(&hsz, &basis);
    for (i, &a) in basis.states.iter().enumerate() {
        for (j, &b) in basis.states.iter().enumerate() {
            let (va, vb) = (fock::pair_state(n, &[(a, 1.0)]), fock::pair_state(n, &[(b, 1.0)]));
            let e = (va.transpose() * &full * &vb)[(0, 0)];
            assert!((e - dense[(i, j)]).abs() < 1e-10);
        }
    }
}

#[test]
fn doci_brackets() {
    let mut rng = stream_rng(46, 0);
    for _ in 0..5 {
        let sys = random_system(4, 4, &mut rng);
        let (doci, _, _) = doci_ground_state(&build_seniority_zero(&sys), 2).unwrap();
        let fci = fci_ground_state(&sys, 2, 2).unwrap();
        assert!(fci <= doci + 1e-10 && doci <= sys.hf_energy() + 1e-10);
    }
}

#[test]
fn oo_doci_fixed_point() {
    let sys = common::system("lih", 2.6);
    let cfg = OoDociConfig::standard(&sys);
    let first = oo_doci(&sys, &cfg).unwrap();
    assert!(first.converged);
    let again = oo_doci_from(&sys, &first.rotation, &cfg).unwrap();
    assert!(again.iterations <= 1, "{}", again.iterations);
    assert!((again.energy - first.energy).abs() < 1e-9);
}

#[test]
fn stretched_water_seniority_zero_gap() {
    let sys = common::system("h2o", 2.0);
    let fci = fci_ground_state(&sys, sys.n_elec / 2, sys.n_elec / 2).unwrap();
    let oo = oo_doci(&sys, &OoDociConfig::standard(&sys)).unwrap();
    let gap = oo.energy - fci;
    assert!((0.010..=0.035).contains(&gap), "gap {gap}");
}

#[test]
fn li2o_full_ci_refused() {
    let sys = common::system("li2o", 1.6);
    assert!(fci_ground_state(&sys, sys.n_elec / 2, sys.n_elec / 2).is_err());
}
