//! Seeded random quantum objects: Haar-like pure states, mixed density
//! matrices, and circuit parameter draws. Used by stress tests and the
//! baseline oracles; everything is deterministic given the generator state.

use num_complex::Complex64;

use crate::circuit::{param_count, ParamVector};
use crate::qmath::{DensityMatrix, PureState};
use crate::rng::SplitMix64;

/// One standard normal sample by Box-Muller.
fn normal(rng: &mut SplitMix64) -> f64 {
    let u1 = rng.next_f64().max(f64::MIN_POSITIVE);
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random pure state with Gaussian amplitudes, normalized.
pub fn random_pure_state(n_qubits: usize, rng: &mut SplitMix64) -> PureState {
    let dim = 1usize << n_qubits;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(normal(rng), normal(rng)))
        .collect();
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    PureState::try_new(n_qubits, amps).expect("normalized by construction")
}

/// Random mixed state as a weighted mixture of `rank` random pure states.
pub fn random_density_matrix(n_qubits: usize, rank: usize, rng: &mut SplitMix64) -> DensityMatrix {
    assert!(rank >= 1);
    let weights: Vec<f64> = (0..rank).map(|_| rng.next_f64() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let pures: Vec<DensityMatrix> = (0..rank)
        .map(|_| random_pure_state(n_qubits, rng).to_density())
        .collect();
    let parts: Vec<(f64, &DensityMatrix)> = weights
        .iter()
        .zip(&pures)
        .map(|(w, p)| (w / total, p))
        .collect();
    DensityMatrix::mixture(&parts).expect("convex mixture of states")
}

/// Uniform parameter draw in `[-scale, scale)` per coordinate.
pub fn random_param_vector(
    n_target: usize,
    n_ancilla: usize,
    scale: f64,
    rng: &mut SplitMix64,
) -> ParamVector {
    let values: Vec<f64> = (0..param_count(n_target, n_ancilla))
        .map(|_| rng.uniform(-scale, scale))
        .collect();
    ParamVector::try_new(n_target, n_ancilla, values).expect("length matches by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_objects_are_valid_and_deterministic() {
        let mut a = SplitMix64::new(77);
        let mut b = SplitMix64::new(77);
        let s1 = random_pure_state(2, &mut a);
        let s2 = random_pure_state(2, &mut b);
        assert_eq!(s1.amplitudes(), s2.amplitudes());
        assert!((s1.norm() - 1.0).abs() < 1e-12);

        let rho = random_density_matrix(2, 3, &mut a);
        assert_eq!(rho.dim(), 4);
    }
}
