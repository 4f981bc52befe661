//! Randomized properties of the discrimination baselines and their
//! cross-oracle agreement.

use vqsd::discrimination::{
    brute_force_two_state, error_probability, helstrom, optimality_certificate,
    pretty_good_measurement, LabeledEnsemble,
};
use vqsd::encoding::{rho_zeta, MixedStateSpec, PauliAxis};
use vqsd::qmath::hermitian_eig;
use vqsd::random::random_density_matrix;
use vqsd::rng::SplitMix64;

#[test]
fn helstrom_symmetry_and_guessing_bound() {
    let mut rng = SplitMix64::new(11);
    for _ in 0..50 {
        let rho0 = random_density_matrix(1, 2, &mut rng);
        let rho1 = random_density_matrix(1, 2, &mut rng);
        let q0 = rng.uniform(0.05, 0.95);
        let q1 = 1.0 - q0;
        let forward = helstrom(&rho0, &rho1, q0, q1).unwrap();
        let backward = helstrom(&rho1, &rho0, q1, q0).unwrap();
        assert!((forward.bound - backward.bound).abs() < 1e-12);
        // Guessing the likelier state is always available.
        assert!(forward.bound <= q0.min(q1) + 1e-12);
        assert!(forward.bound >= -1e-12);

        // Projector structure and achievability.
        let sum = forward.e0.add(&forward.e1);
        assert!(sum.max_abs_diff(&vqsd::qmath::ComplexMatrix::identity(2)) < 1e-9);
        let idem = forward.e0.matmul(&forward.e0);
        assert!(idem.max_abs_diff(&forward.e0) < 1e-8);

        let ens =
            LabeledEnsemble::try_new(vec![rho0.clone(), rho1.clone()], vec![q0, q1]).unwrap();
        let err = error_probability(&ens, &forward.povm().unwrap()).unwrap();
        assert!((err - forward.bound).abs() < 1e-9);
    }
}

#[test]
fn certificate_accepts_helstrom_projectors() {
    let mut rng = SplitMix64::new(23);
    for _ in 0..50 {
        let rho0 = random_density_matrix(1, 2, &mut rng);
        let rho1 = random_density_matrix(1, 2, &mut rng);
        let q0 = rng.uniform(0.1, 0.9);
        let result = helstrom(&rho0, &rho1, q0, 1.0 - q0).unwrap();
        let ens = LabeledEnsemble::try_new(vec![rho0, rho1], vec![q0, 1.0 - q0]).unwrap();
        let report =
            optimality_certificate(&ens, &result.povm().unwrap(), 1e-7).unwrap();
        assert!(report.pass, "{report:?}");
    }
}

#[test]
fn pgm_elements_are_psd_and_complete() {
    let mut rng = SplitMix64::new(37);
    for trial in 0..30 {
        let n_states = 2 + trial % 3;
        let states: Vec<_> = (0..n_states)
            .map(|_| random_density_matrix(1, 1 + trial % 2, &mut rng))
            .collect();
        let ens = LabeledEnsemble::uniform(states).unwrap();
        // PovmSet::try_new validates completeness and positivity; inspect the
        // eigenvalues again at the tighter bound.
        let pgm = pretty_good_measurement(&ens).unwrap();
        let mut sum = vqsd::qmath::ComplexMatrix::zeros(2, 2);
        for e in pgm.elements() {
            assert!(hermitian_eig(e).unwrap().eigenvalues[0] >= -1e-10);
            sum = sum.add(e);
        }
        assert!(sum.max_abs_diff(&vqsd::qmath::ComplexMatrix::identity(2)) < 1e-9);
    }
}

#[test]
fn brute_force_upper_bounds_and_approaches_helstrom() {
    let mut rng = SplitMix64::new(53);
    for _ in 0..10 {
        let rho0 = random_density_matrix(1, 2, &mut rng);
        let rho1 = random_density_matrix(1, 2, &mut rng);
        let bound = helstrom(&rho0, &rho1, 0.5, 0.5).unwrap().bound;
        let coarse = brute_force_two_state(&rho0, &rho1, 0.5, 0.5, 40).unwrap();
        let fine = brute_force_two_state(&rho0, &rho1, 0.5, 0.5, 400).unwrap();
        assert!(coarse >= bound - 1e-12);
        assert!(fine >= bound - 1e-12);
        assert!(fine <= coarse + 1e-12, "refinement must not get worse");
        assert!((fine - bound).abs() < 2e-4);
    }
}

#[test]
fn mixed_state_pair_cross_oracle() {
    // The standard two-mixed-state pair used by the runner presets.
    let rho0 = rho_zeta(&MixedStateSpec {
        axis: PauliAxis::Z,
        angle: std::f64::consts::PI / 5.0,
    })
    .unwrap();
    let rho1 = rho_zeta(&MixedStateSpec {
        axis: PauliAxis::X,
        angle: std::f64::consts::PI / 6.0,
    })
    .unwrap();
    let analytic = helstrom(&rho0, &rho1, 0.5, 0.5).unwrap().bound;
    let grid = brute_force_two_state(&rho0, &rho1, 0.5, 0.5, 400).unwrap();
    assert!((analytic - grid).abs() < 1e-4, "{analytic} vs {grid}");
}

#[test]
fn error_probability_stays_in_range_for_circuit_povms() {
    use vqsd::circuit::{povm_elements, PovmCircuitSpec};
    use vqsd::random::random_param_vector;

    let mut rng = SplitMix64::new(61);
    let spec = PovmCircuitSpec::try_new(1, 1, 2, vec![0]).unwrap();
    for _ in 0..40 {
        let rho0 = random_density_matrix(1, 2, &mut rng);
        let rho1 = random_density_matrix(1, 2, &mut rng);
        let bound = helstrom(&rho0, &rho1, 0.5, 0.5).unwrap().bound;
        let ens = LabeledEnsemble::uniform(vec![rho0, rho1]).unwrap();
        let theta = random_param_vector(1, 1, std::f64::consts::PI, &mut rng);
        let povm = povm_elements(&spec, &theta).unwrap();
        let err = error_probability(&ens, &povm).unwrap();
        assert!(err >= bound - 1e-9, "err {err} below Helstrom bound {bound}");
        assert!(err <= 1.0 + 1e-10);
    }
}
