//! Structural invariants of the POVM circuit over random parameter draws:
//! Kraus/POVM completeness, PSD elements, probability normalization, and the
//! equivalence of the statevector and Kraus-operator routes.

use vqsd::circuit::{
    kraus_operators, outcome_probabilities, povm_elements, ParamVector, PovmCircuitSpec,
};
use vqsd::qmath::{hermitian_eig, ComplexMatrix};
use vqsd::random::{random_param_vector, random_pure_state};
use vqsd::rng::SplitMix64;

const SHAPES: [(usize, usize); 3] = [(1, 1), (1, 2), (2, 2)];

fn spec_for(n_target: usize, n_ancilla: usize) -> PovmCircuitSpec {
    let targets: Vec<usize> = (0..n_target).collect();
    PovmCircuitSpec::try_new(n_target, n_ancilla, 1 << n_ancilla, targets).unwrap()
}

#[test]
fn completeness_over_random_parameter_draws() {
    let mut rng = SplitMix64::new(31337);
    let mut draws = 0;
    while draws < 200 {
        for (n_target, n_ancilla) in SHAPES {
            let spec = spec_for(n_target, n_ancilla);
            let theta = random_param_vector(n_target, n_ancilla, std::f64::consts::PI, &mut rng);

            let kraus = kraus_operators(&spec, &theta).unwrap();
            assert!(
                kraus.completeness_defect() < 1e-10,
                "Kraus completeness defect {} at ({n_target},{n_ancilla})",
                kraus.completeness_defect()
            );

            let povm = povm_elements(&spec, &theta).unwrap();
            let dim = spec.target_dim();
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for e in povm.elements() {
                let eig = hermitian_eig(e).unwrap();
                assert!(eig.eigenvalues[0] >= -1e-10);
                assert!(eig.eigenvalues[eig.eigenvalues.len() - 1] <= 1.0 + 1e-10);
                sum = sum.add(e);
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
            draws += 1;
        }
    }
}

#[test]
fn statevector_and_kraus_routes_agree() {
    // p(m) from full simulation must match Tr[K_m^dag K_m rho_T] with rho_T
    // the reduced input state on the target qubits, including when the
    // targets are a reordered subset of a larger register.
    let mut rng = SplitMix64::new(777);
    let cases: Vec<(usize, PovmCircuitSpec)> = vec![
        (1, spec_for(1, 1)),
        (2, PovmCircuitSpec::try_new(1, 1, 2, vec![1]).unwrap()),
        (2, PovmCircuitSpec::try_new(1, 2, 3, vec![0]).unwrap()),
        (2, spec_for(2, 2)),
        (3, PovmCircuitSpec::try_new(2, 2, 4, vec![2, 0]).unwrap()),
    ];
    for (n_input, spec) in &cases {
        for _ in 0..20 {
            let theta = random_param_vector(
                spec.n_target(),
                spec.n_ancilla(),
                std::f64::consts::PI,
                &mut rng,
            );
            let input = random_pure_state(*n_input, &mut rng);

            let probs = outcome_probabilities(&input, spec, &theta).unwrap();
            assert!(probs.iter().all(|&p| p >= -1e-12));
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);

            let reduced = input.reduced_density(spec.target_qubits()).unwrap();
            let povm = povm_elements(spec, &theta).unwrap();
            for (m, e) in povm.elements().iter().enumerate() {
                let via_kraus = reduced.matrix().trace_product_re(e);
                assert!(
                    (probs[m] - via_kraus).abs() < 1e-9,
                    "outcome {m}: simulated {} vs Kraus {}",
                    probs[m],
                    via_kraus
                );
            }
        }
    }
}

#[test]
fn output_norm_is_preserved() {
    let mut rng = SplitMix64::new(4242);
    let spec = spec_for(2, 2);
    for _ in 0..25 {
        let theta = random_param_vector(2, 2, std::f64::consts::PI, &mut rng);
        let input = random_pure_state(2, &mut rng);
        let out = vqsd::circuit::apply_povm_circuit(&input, &spec, &theta).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn param_vector_length_is_enforced_for_each_shape() {
    for (n_target, n_ancilla) in SHAPES {
        let expected = vqsd::circuit::param_count(n_target, n_ancilla);
        assert!(ParamVector::try_new(n_target, n_ancilla, vec![0.0; expected]).is_ok());
        for delta in [-1i64, 1] {
            let wrong = (expected as i64 + delta) as usize;
            assert!(ParamVector::try_new(n_target, n_ancilla, vec![0.0; wrong]).is_err());
        }
    }
}
