//! Parametric CX noise: coherent over-rotation of the entangler and global
//! depolarization, both simulated as trajectories.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::simulator::{sample_with, Basis, Circuit, Gate, Sampler, ShotCounts, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    #[default]
    None,
    Coherent,
    Depolarizing,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::None => "none",
            NoiseKind::Coherent => "coherent",
            NoiseKind::Depolarizing => "depolarizing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub r: f64,
    /// shots between δ redraws (coherent only)
    pub resample_every: u64,
    /// draw an independent δ for every CX instead of one per window
    pub per_gate: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            kind: NoiseKind::None,
            r: 0.0,
            resample_every: 10,
            per_gate: false,
        }
    }
}

impl NoiseModel {
    pub fn coherent(r: f64) -> Self {
        Self {
            kind: NoiseKind::Coherent,
            r,
            ..Self::default()
        }
    }

    pub fn depolarizing(r: f64) -> Self {
        Self {
            kind: NoiseKind::Depolarizing,
            r,
            ..Self::default()
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.kind == NoiseKind::None || self.r == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 0.0 || (self.kind == NoiseKind::Depolarizing && self.r > 1.0) {
            return Err(Error::Spec(format!("noise rate {} out of range", self.r)));
        }
        if self.resample_every == 0 {
            return Err(Error::Spec("resample_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// CX(control → target) realized as Ry(π/2)_c, ZX(rδ), XX(π/4 + rδ), ZX(−rδ),
/// Rx(−π/2)⊗Rx(−π/2), Ry(−π/2)_c. At rδ = 0 this is CX up to a global phase.
pub fn noisy_cx(r: f64, delta: f64, control: usize, target: usize, n_qubits: usize) -> Result<Circuit> {
    let e = r * delta;
    let quarter = std::f64::consts::FRAC_PI_4;
    let half = std::f64::consts::FRAC_PI_2;
    let mut c = Circuit::new(n_qubits);
    for g in [
        Gate::Ry(control, half),
        Gate::Zx(control, target, e),
        Gate::Xx(control, target, quarter + e),
        Gate::Zx(control, target, -e),
        Gate::Rx(control, -half),
        Gate::Rx(target, -half),
        Gate::Ry(control, -half),
    ] {
        c.push(g)?;
    }
    Ok(c)
}

fn check_gates(circuit: &Circuit) -> Result<Vec<usize>> {
    let mut sites = Vec::new();
    for (k, g) in circuit.gates.iter().enumerate() {
        match g {
            Gate::Cx { .. } => sites.push(k),
            g if g.is_two_qubit() => return Err(Error::UnsupportedGate(g.to_string())),
            _ => {}
        }
    }
    Ok(sites)
}

fn run_gates(state: &mut StateVector, gates: &[Gate]) {
    for g in gates {
        state.apply(g);
    }
}

/// Samples `shots` measurements of `circuit` (from |0…0⟩) under the noise model.
pub fn run_noisy<R: Rng + ?Sized>(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    basis: Basis,
    rng: &mut R,
) -> Result<ShotCounts> {
    model.validate()?;
    let n = circuit.n_qubits;
    if model.kind == NoiseKind::None {
        let mut st = StateVector::zero(n);
        run_gates(&mut st, &circuit.gates);
        return Ok(sample_with(&st, shots, basis, rng));
    }
    let sites = check_gates(circuit)?;
    match model.kind {
        NoiseKind::Coherent => run_coherent(circuit, model, shots, basis, rng),
        NoiseKind::Depolarizing => Ok(run_depolarizing(circuit, &sites, model.r, shots, basis, rng)),
        NoiseKind::None => unreachable!(),
    }
}

fn run_coherent<R: Rng + ?Sized>(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    basis: Basis,
    rng: &mut R,
) -> Result<ShotCounts> {
    let n = circuit.n_qubits;
    let mut out = ShotCounts::new(n, basis);
    let mut done = 0;
    while done < shots {
        let window = model.resample_every.min(shots - done);
        let shared: f64 = rng.sample(StandardNormal);
        let mut st = StateVector::zero(n);
        for g in &circuit.gates {
            if let Gate::Cx { control, target } = *g {
                let delta = if model.per_gate { rng.sample(StandardNormal) } else { shared };
                run_gates(&mut st, &noisy_cx(model.r, delta, control, target, n)?.gates);
            } else {
                st.apply(g);
            }
        }
        out.merge(&sample_with(&st, window, basis, rng));
        done += window;
    }
    Ok(out)
}

// Only the last depolarizing event matters: after it the register is a random basis
// state and the remaining gates act ideally.
fn run_depolarizing<R: Rng + ?Sized>(
    circuit: &Circuit,
    sites: &[usize],
    r: f64,
    shots: u64,
    basis: Basis,
    rng: &mut R,
) -> ShotCounts {
    let n = circuit.n_qubits;
    let dim = 1usize << n;
    let mut ideal = StateVector::zero(n);
    run_gates(&mut ideal, &circuit.gates);
    let ideal = Sampler::new(&ideal.probabilities());
    let mut cache: HashMap<(usize, usize), Sampler> = HashMap::new();
    let mut out = ShotCounts::new(n, basis);
    for _ in 0..shots {
        let last = sites.iter().rev().find(|_| rng.gen::<f64>() < r).copied();
        let outcome = match last {
            None => ideal.draw(rng),
            Some(site) => {
                let b = rng.gen_range(0..dim);
                let tail = &circuit.gates[site + 1..];
                if let Some(s) = cache.get(&(site, b)) {
                    s.draw(rng)
                } else {
                    let mut st = StateVector::basis(n, b);
                    run_gates(&mut st, tail);
                    let s = Sampler::new(&st.probabilities());
                    let o = s.draw(rng);
                    if cache.len() < 4096 {
                        cache.insert((site, b), s);
                    }
                    o
                }
            }
        };
        out.record(outcome, 1);
    }
    out
}
