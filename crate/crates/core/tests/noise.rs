use num_complex::Complex64;
use pairvqe::noise::{noisy_cx, run_noisy, NoiseModel};
use pairvqe::rng::stream_rng;
use pairvqe::simulator::{run_circuit, sample_with, Basis, Circuit, Gate, ShotCounts, StateVector};
use rand::Rng;

fn bell_like(theta: f64) -> Circuit {
    let mut c = Circuit::new(2);
    c.push(Gate::Ry(0, theta)).unwrap();
    c.push(Gate::Cx { control: 0, target: 1 }).unwrap();
    c
}

fn assert_within_5_sigma(counts: &ShotCounts, probs: &[f64]) {
    let n = counts.shots as f64;
    for (b, &p) in probs.iter().enumerate() {
        let seen = *counts.counts.get(&b).unwrap_or(&0) as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt().max(1.0 / n);
        assert!((seen - p).abs() < 5.0 * sigma, "outcome {b}: {seen} vs {p}");
    }
}

#[test]
fn no_noise_is_plain_sampling() {
    let c = bell_like(1.1);
    let a = run_noisy(&c, &NoiseModel::default(), 5000, Basis::Z, &mut stream_rng(50, 0)).unwrap();
    let st = run_circuit(&StateVector::zero(2), &c).unwrap();
    let b = sample_with(&st, 5000, Basis::Z, &mut stream_rng(50, 0));
    assert_eq!(a, b);
}

#[test]
fn full_depolarization_is_uniform() {
    let mut c = bell_like(0.7);
    c.push(Gate::Ry(1, 0.4)).unwrap();
    c.push(Gate::Cx { control: 1, target: 0 }).unwrap();
    let counts = run_noisy(&c, &NoiseModel::depolarizing(1.0), 100_000, Basis::Z, &mut stream_rng(51, 0)).unwrap();
    assert_within_5_sigma(&counts, &[0.25; 4]);
}

#[test]
fn depolarizing_trajectories_reproduce_the_channel() {
    let theta: f64 = 1.3;
    let ideal = [(theta / 2.0).cos().powi(2), 0.0, 0.0, (theta / 2.0).sin().powi(2)];
    for r in [0.1, 0.5] {
        let counts = run_noisy(&bell_like(theta), &NoiseModel::depolarizing(r), 100_000, Basis::Z, &mut stream_rng(52, 0)).unwrap();
        let mixed: Vec<f64> = ideal.iter().map(|p| (1.0 - r) * p + r * 0.25).collect();
        assert_within_5_sigma(&counts, &mixed);
    }
}

#[test]
fn depolarizing_before_later_gates_propagates_through_them() {
    // CX then Ry on qubit 0: a reset to a random basis state is followed by the ideal Ry
    let theta: f64 = 0.9;
    let mut c = bell_like(theta);
    c.push(Gate::Ry(0, 0.6)).unwrap();
    let r = 0.3;
    let ideal = run_circuit(&StateVector::zero(2), &c).unwrap().probabilities();
    let mut tail = Circuit::new(2);
    tail.push(Gate::Ry(0, 0.6)).unwrap();
    let mut avg = [0.0; 4];
    for b in 0..4 {
        let p = run_circuit(&StateVector::basis(2, b), &tail).unwrap().probabilities();
        for k in 0..4 {
            avg[k] += p[k] / 4.0;
        }
    }
    let want: Vec<f64> = (0..4).map(|k| (1.0 - r) * ideal[k] + r * avg[k]).collect();
    let counts = run_noisy(&c, &NoiseModel::depolarizing(r), 100_000, Basis::Z, &mut stream_rng(53, 0)).unwrap();
    assert_within_5_sigma(&counts, &want);
}

#[test]
fn noisy_cx_preserves_norm() {
    let mut rng = stream_rng(54, 0);
    for _ in 0..20 {
        let amps: Vec<Complex64> = (0..8).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let st = StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap();
        let delta: f64 = rng.gen_range(-3.0..3.0);
        let out = run_circuit(&st, &noisy_cx(0.05, delta, 2, 0, 3).unwrap()).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn coherent_noise_at_zero_rate_is_ideal_in_distribution() {
    let c = bell_like(1.9);
    let ideal = run_circuit(&StateVector::zero(2), &c).unwrap().probabilities();
    for per_gate in [false, true] {
        let model = NoiseModel {
            per_gate,
            ..NoiseModel::coherent(0.0)
        };
        let counts = run_noisy(&c, &model, 50_000, Basis::Z, &mut stream_rng(55, 0)).unwrap();
        assert_within_5_sigma(&counts, &ideal);
    }
}

#[test]
fn coherent_noise_moves_weight_off_the_ideal_support() {
    let c = bell_like(0.0);
    let counts = run_noisy(&c, &NoiseModel::coherent(0.3), 20_000, Basis::Z, &mut stream_rng(56, 0)).unwrap();
    let leaked = counts.shots - counts.counts.get(&0).copied().unwrap_or(0);
    assert!(leaked > 100, "{leaked}");
    assert_eq!(counts.shots, 20_000);
}

#[test]
fn rejects_other_two_qubit_gates_under_noise() {
    let mut c = Circuit::new(2);
    c.push(Gate::Xx(0, 1, 0.3)).unwrap();
    assert!(run_noisy(&c, &NoiseModel::depolarizing(0.1), 10, Basis::Z, &mut stream_rng(57, 0)).is_err());
    assert!(run_noisy(&c, &NoiseModel::default(), 10, Basis::Z, &mut stream_rng(57, 0)).is_ok());
}
