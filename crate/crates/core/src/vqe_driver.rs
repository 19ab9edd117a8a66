//! Outer optimization loop: SPSA over pair amplitudes interleaved with one Newton
//! orbital step per macro-iteration, integrals rotated after each step.

use nalgebra::DMatrix;
use rand::Rng;

use crate::ansatz::{build_upccd_circuit_with, Decomposition, PairAnsatz};
use crate::error::{Error, Result};
use crate::estimator::{assemble_spinless_rdms, energy_from_rdms, estimate_from_counts, exact_rdms, measurement_circuits, RdmSet};
use crate::integrals::{build_seniority_zero, localize_pair_spaces, rotate_integrals, MolecularSystem, SzHamiltonian};
use crate::noise::{run_noisy, NoiseModel};
use crate::orbital_opt::{gradient_stderr, oo_iteration, OrbitalConfig};
use crate::pair_sector::PairSectorEngine;
use crate::rng::{stream_rng, SimRng};
use crate::simulator::{run_circuit, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub max_iter: usize,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a: 0.1,
            c: 0.1,
            big_a: 10.0,
            alpha: 0.602,
            gamma: 0.101,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpsaOutcome {
    pub t: Vec<f64>,
    pub energy: f64,
    pub stderr: f64,
    pub evaluations: usize,
    /// every iterate, starting with t0
    pub iterates: Vec<Vec<f64>>,
}

/// SPSA with Rademacher perturbations; returns the lowest-energy iterate seen.
pub fn spsa_minimize<F, R>(mut objective: F, t0: &[f64], cfg: &SpsaConfig, rng: &mut R) -> Result<SpsaOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, f64)>,
    R: Rng + ?Sized,
{
    let mut t = t0.to_vec();
    let mut iterates = vec![t.clone()];
    if cfg.max_iter == 0 || t.is_empty() {
        let (e, s) = if t.is_empty() { objective(&t)? } else { (f64::NAN, f64::NAN) };
        return Ok(SpsaOutcome {
            t,
            energy: e,
            stderr: s,
            evaluations: usize::from(t0.is_empty()),
            iterates,
        });
    }
    let (mut best_e, mut best_s) = objective(&t)?;
    let mut best_t = t.clone();
    let mut evals = 1;
    for k in 0..cfg.max_iter {
        let ak = cfg.a / (k as f64 + 1.0 + cfg.big_a).powf(cfg.alpha);
        let ck = cfg.c / (k as f64 + 1.0).powf(cfg.gamma);
        let delta: Vec<f64> = t.iter().map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = t.iter().zip(&delta).map(|(x, d)| x + ck * d).collect();
        let minus: Vec<f64> = t.iter().zip(&delta).map(|(x, d)| x - ck * d).collect();
        let (ep, _) = objective(&plus)?;
        let (em, _) = objective(&minus)?;
        let diff = (ep - em) / (2.0 * ck);
        for (x, d) in t.iter_mut().zip(&delta) {
            *x -= ak * diff / d;
        }
        let (e, s) = objective(&t)?;
        evals += 3;
        iterates.push(t.clone());
        if e < best_e {
            best_e = e;
            best_s = s;
            best_t = t.clone();
        }
    }
    Ok(SpsaOutcome {
        t: best_t,
        energy: best_e,
        stderr: best_s,
        evaluations: evals,
        iterates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrbitalSeed {
    Canonical,
    Localized,
    /// run from both and keep the lower final energy
    #[default]
    Best,
}

/// How exact mode (shots = 0) evaluates the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExactEngine {
    /// full statevector simulation of the compiled circuit
    #[default]
    Statevector,
    /// real amplitudes on the pair basis (noiseless only)
    PairSector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeConfig {
    /// shots per measurement basis; 0 = exact expectations
    pub shots: u64,
    pub spsa: SpsaConfig,
    pub macro_max: usize,
    pub e_tol: f64,
    pub seed: u64,
    /// RNG stream (distinct per geometry in a scan)
    pub stream: u64,
    pub noise: NoiseModel,
    pub orbital: OrbitalConfig,
    pub optimize_orbitals: bool,
    pub orbital_seed: OrbitalSeed,
    pub decomposition: Decomposition,
    pub exact_engine: ExactEngine,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl VqeConfig {
    pub fn exact() -> Self {
        Self {
            shots: 0,
            spsa: SpsaConfig::default(),
            macro_max: 100,
            e_tol: 1e-6,
            seed: 0,
            stream: 0,
            noise: NoiseModel::default(),
            orbital: OrbitalConfig::default(),
            optimize_orbitals: true,
            orbital_seed: OrbitalSeed::Best,
            decomposition: Decomposition::Magic,
            exact_engine: ExactEngine::Statevector,
        }
    }

    pub fn with_shots(shots: u64) -> Self {
        Self {
            shots,
            e_tol: 1e-3,
            ..Self::exact()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_tol > 0.0) {
            return Err(Error::Spec(format!("e_tol must be positive, got {}", self.e_tol)));
        }
        self.noise.validate()?;
        if self.shots == 0 && !self.noise.is_noiseless() {
            return Err(Error::Spec("noise models need a shot-based backend".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    /// energy ± stderr after each macro-iteration, in the rotated basis
    pub trace: Vec<(f64, f64)>,
    /// running minimum of the trace
    pub best_trace: Vec<f64>,
    pub energy: f64,
    pub stderr: f64,
    pub t: Vec<f64>,
    pub c_total: DMatrix<f64>,
    pub active_mask: Vec<bool>,
    pub shots_used: u64,
    pub converged: bool,
    pub macro_iters: usize,
    /// max |t| over every SPSA iterate, per excitation
    pub max_abs_t: Vec<f64>,
    pub grad_norms: Vec<f64>,
}

/// Energy evaluation through the circuit, either exactly or from three sampled bases.
struct Backend<'a> {
    ansatz: &'a PairAnsatz,
    cfg: &'a VqeConfig,
    pair: Option<PairSectorEngine>,
    shots_used: u64,
}

impl<'a> Backend<'a> {
    fn new(ansatz: &'a PairAnsatz, cfg: &'a VqeConfig) -> Result<Self> {
        let pair = if cfg.shots == 0 && cfg.exact_engine == ExactEngine::PairSector {
            Some(PairSectorEngine::new(ansatz)?)
        } else {
            None
        };
        Ok(Self {
            ansatz,
            cfg,
            pair,
            shots_used: 0,
        })
    }

    fn measure(&mut self, hsz: &SzHamiltonian, t: &[f64], rng: &mut SimRng) -> Result<(RdmSet, f64, f64)> {
        if let Some(engine) = &self.pair {
            let rdms = engine.rdms(&engine.state(t, &self.ansatz.active_mask)?);
            let (e, s) = energy_from_rdms(&rdms, hsz)?;
            return Ok((rdms, e, s));
        }
        let circuit = build_upccd_circuit_with(&self.ansatz.with_params(t)?, self.cfg.decomposition);
        let rdms = if self.cfg.shots == 0 {
            let st = run_circuit(&StateVector::zero(circuit.n_qubits), &circuit)?;
            exact_rdms(&st)?
        } else {
            let [(bz, cz), (bx, cx), (by, cy)] = measurement_circuits(&circuit);
            let z = run_noisy(&cz, &self.cfg.noise, self.cfg.shots, bz, rng)?;
            let x = run_noisy(&cx, &self.cfg.noise, self.cfg.shots, bx, rng)?;
            let y = run_noisy(&cy, &self.cfg.noise, self.cfg.shots, by, rng)?;
            self.shots_used += 3 * self.cfg.shots;
            estimate_from_counts(&z, &x, &y)?
        };
        let (e, s) = energy_from_rdms(&rdms, hsz)?;
        Ok((rdms, e, s))
    }
}

fn expand(template: &[f64], mask: &[bool], active: &[f64]) -> Vec<f64> {
    let mut full = template.to_vec();
    let mut it = active.iter();
    for (k, &m) in mask.iter().enumerate() {
        if m {
            full[k] = *it.next().unwrap();
        }
    }
    full
}

/// Runs the macro-loop from the orbitals rotate_integrals(sys, c0).
pub fn run_vqe_from(sys: &MolecularSystem, ansatz: &PairAnsatz, cfg: &VqeConfig, c0: &DMatrix<f64>, stream: u64) -> Result<VqeResult> {
    cfg.validate()?;
    if ansatz.n_orb != sys.n_orb || ansatz.occ.len() != sys.n_pairs() {
        return Err(Error::Dimension(format!(
            "ansatz for {} orbitals / {} pairs, system has {} / {}",
            ansatz.n_orb,
            ansatz.occ.len(),
            sys.n_orb,
            sys.n_pairs()
        )));
    }
    let mut rng = stream_rng(cfg.seed, stream);
    let mut backend = Backend::new(ansatz, cfg)?;
    let mut cur = rotate_integrals(sys, c0)?;
    let mut c_total = c0.clone();
    let mut hsz = build_seniority_zero(&cur);
    let mask = ansatz.active_mask.clone();
    let mut t = ansatz.t.clone();
    let mut max_abs_t: Vec<f64> = t.iter().map(|v| v.abs()).collect();

    let (_, mut e_prev, mut s_prev) = backend.measure(&hsz, &t, &mut rng)?;
    let mut trace = Vec::new();
    let mut grad_norms = Vec::new();
    let mut converged = false;
    let mut calm = 0;
    let mut spsa = cfg.spsa.clone();
    if cfg.shots > 0 {
        spsa.c = spsa.c.max((2.0 * s_prev).sqrt());
    }

    for _ in 0..cfg.macro_max {
        let active0: Vec<f64> = t.iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| *v).collect();
        let outcome = {
            let template = t.clone();
            let hsz_ref = &hsz;
            let backend_ref = &mut backend;
            let mut inner_rng = rng.clone();
            let res = spsa_minimize(
                |a: &[f64]| {
                    let full = expand(&template, &mask, a);
                    let (_, e, s) = backend_ref.measure(hsz_ref, &full, &mut inner_rng)?;
                    Ok((e, s))
                },
                &active0,
                &spsa,
                &mut rng,
            )?;
            rng = inner_rng;
            res
        };
        for it in &outcome.iterates {
            for (m, v) in max_abs_t.iter_mut().zip(expand(&t, &mask, it)) {
                *m = m.max(v.abs());
            }
        }
        t = expand(&t, &mask, &outcome.t);

        let (rdms, e_meas, s_meas) = backend.measure(&hsz, &t, &mut rng)?;
        let (e_now, s_now, grad_ok) = if cfg.optimize_orbitals {
            let spinless = assemble_spinless_rdms(&rdms);
            let (next, report) = oo_iteration(&cur, &spinless, &cfg.orbital)?;
            let gnorm = report.omega.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let floor = if rdms.is_exact() {
                1e-6
            } else {
                let se = gradient_stderr(&rdms, &cur)?;
                se.iter().fold(1e-6f64, |m, v| m.max(3.0 * v))
            };
            grad_norms.push(gnorm);
            c_total *= &report.rotation;
            cur = next;
            hsz = build_seniority_zero(&cur);
            (e_meas + report.actual_de, s_meas, gnorm < floor)
        } else {
            (e_meas, s_meas, true)
        };
        trace.push((e_now, s_now));
        if (e_now - e_prev).abs() < cfg.e_tol {
            calm += 1;
        } else {
            calm = 0;
        }
        e_prev = e_now;
        s_prev = s_now;
        if calm >= 2 && grad_ok {
            converged = true;
            break;
        }
    }

    // shot mode: report a fresh estimate at the final parameters and orbitals
    let (energy, stderr) = if cfg.shots > 0 && !trace.is_empty() {
        let (_, e, s) = backend.measure(&hsz, &t, &mut rng)?;
        (e, s)
    } else {
        (e_prev, s_prev)
    };
    let mut best = f64::INFINITY;
    let best_trace = trace
        .iter()
        .map(|(e, _)| {
            best = best.min(*e);
            best
        })
        .collect();
    Ok(VqeResult {
        macro_iters: trace.len(),
        trace,
        best_trace,
        energy,
        stderr,
        t,
        c_total,
        active_mask: mask,
        shots_used: backend.shots_used,
        converged,
        max_abs_t,
        grad_norms,
    })
}

/// Algorithm 1. With orbital optimization and `OrbitalSeed::Best`, runs from the
/// canonical and the localized orbitals and keeps the lower final energy.
pub fn run_vqe(sys: &MolecularSystem, ansatz: &PairAnsatz, cfg: &VqeConfig) -> Result<VqeResult> {
    let n = sys.n_orb;
    let identity = DMatrix::identity(n, n);
    let seeds: Vec<DMatrix<f64>> = match (cfg.optimize_orbitals, cfg.orbital_seed) {
        (false, _) | (true, OrbitalSeed::Canonical) => vec![identity],
        (true, OrbitalSeed::Localized) => vec![localize_pair_spaces(sys)],
        (true, OrbitalSeed::Best) => vec![identity, localize_pair_spaces(sys)],
    };
    let mut best: Option<VqeResult> = None;
    for (k, c0) in seeds.iter().enumerate() {
        let stream = cfg.stream * 16 + k as u64;
        let r = run_vqe_from(sys, ansatz, cfg, c0, stream)?;
        best = match best {
            Some(b) if b.energy <= r.energy => Some(b),
            _ => Some(r),
        };
    }
    Ok(best.expect("at least one seed"))
}

/// Adds (ref_energy − E(ref_geometry)) to every point.
pub fn energy_shift(series: &[(f64, f64)], ref_geometry: f64, ref_energy: f64) -> Result<Vec<(f64, f64)>> {
    let (_, e_ref) = series
        .iter()
        .find(|(g, _)| (g - ref_geometry).abs() < 1e-9)
        .ok_or_else(|| Error::MissingReference(ref_geometry.to_string()))?;
    let shift = ref_energy - e_ref;
    Ok(series.iter().map(|&(g, e)| (g, e + shift)).collect())
}
