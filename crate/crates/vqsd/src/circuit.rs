//! The parameterized POVM circuit.
//!
//! An `l`-outcome POVM on `n_T` target qubits is realized by a unitary on the
//! targets plus `n_A = ceil(log2 l)` ancilla qubits followed by a
//! computational-basis measurement of the ancillas. The unitary is built from
//! a cosine-sine block structure: for each ancilla `a = 1..n_A` (in order) a
//! gate `W_a`, uniformly controlled by ancillas `1..a-1`, applies a general
//! target unitary `U_j` followed by a target-controlled `R_y` on ancilla `a`.
//! The control variants are enumerated by `j(a) = 2^{a-1} + sum z_i 2^{a-1-i}`
//! over the earlier ancilla bits `z_1..z_{a-1}`.
//!
//! Reading the ancilla bit string `z_1..z_{n_A}` as a decimal outcome `m`
//! (`z_1` most significant), the same circuit in operator form gives the
//! Kraus operators
//!
//! ```text
//!     K_m = D_{j(n_A)} U_{j(n_A)} ... D_{j(1)} U_{j(1)},
//! ```
//!
//! where `D_j` is `diag(cos(theta_t/2))` when the layer's ancilla bit is 0 and
//! `diag(sin(theta_t/2))` when it is 1, under the rotation convention
//! `R_y(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>`. POVM elements are
//! `E_m = K_m^dag K_m`. Both routes — full statevector simulation and the
//! Kraus product — are implemented and tested against each other.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{
    exp_i_hermitian, hermitian_eig, pauli_x, pauli_y, pauli_z, ComplexMatrix, PureState,
};

/// Completeness/PSD tolerance for Kraus and POVM sets.
pub const POVM_TOL: f64 = 1e-9;

/// Number of real parameters of the circuit:
/// `(2^n_A - 1) * (4^n_T - 1 + 2^n_T)`.
pub fn param_count(n_target: usize, n_ancilla: usize) -> usize {
    let blocks = (1usize << n_ancilla) - 1;
    let per_block = (1usize << (2 * n_target)) - 1 + (1usize << n_target);
    blocks * per_block
}

/// Block index `j(a) = 2^{a-1} + sum_{i=1}^{a-1} z_i 2^{a-1-i}` selecting the
/// control variant of layer `a` given the earlier ancilla bits.
pub fn kraus_index(a: usize, prefix_bits: &[u8]) -> usize {
    assert!(a >= 1, "layer index is 1-based");
    assert_eq!(prefix_bits.len(), a - 1, "need {} prefix bits", a - 1);
    let mut j = 1usize << (a - 1);
    for (i, &z) in prefix_bits.iter().enumerate() {
        j += (z as usize) << (a - 2 - i);
    }
    j
}

/// The non-identity n-qubit Pauli strings in lexicographic order
/// (I < X < Y < Z per qubit, identity string excluded).
fn pauli_string(n_qubits: usize, index: usize) -> ComplexMatrix {
    debug_assert!(index >= 1 && index < 1 << (2 * n_qubits));
    let single = |digit: usize| match digit {
        0 => ComplexMatrix::identity(2),
        1 => pauli_x(),
        2 => pauli_y(),
        _ => pauli_z(),
    };
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n_qubits {
        let digit = (index >> (2 * (n_qubits - 1 - q))) & 0b11;
        out = out.kron(&single(digit));
    }
    out
}

/// General unitary on `n` qubits from `4^n - 1` real generator coefficients:
/// `exp(i sum_k c_k G_k)` over the non-identity Pauli strings `G_k`.
pub fn build_block_unitary(generator_coeffs: &[f64]) -> Result<ComplexMatrix> {
    let count = generator_coeffs.len();
    let n_qubits = match count {
        3 => 1,
        15 => 2,
        63 => 3,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "generator coefficient count {count} is not 4^n - 1 for n in 1..=3"
            )))
        }
    };
    let dim = 1usize << n_qubits;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (k, &c) in generator_coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        h = h.add(&pauli_string(n_qubits, k + 1).scale_re(c));
    }
    exp_i_hermitian(&h)
}

/// Static description of a POVM circuit: target register size, ancilla count,
/// outcome count, and which input qubits the measurement acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmCircuitSpec {
    n_target: usize,
    n_ancilla: usize,
    n_outcomes: usize,
    target_qubits: Vec<usize>,
}

impl PovmCircuitSpec {
    /// `n_outcomes` is the number of labeled outcomes `l`; it must satisfy
    /// `2 <= l <= 2^n_ancilla` with `n_ancilla = ceil(log2 l)`.
    pub fn try_new(
        n_target: usize,
        n_ancilla: usize,
        n_outcomes: usize,
        target_qubits: Vec<usize>,
    ) -> Result<Self> {
        if n_target == 0 || n_ancilla == 0 {
            return Err(Error::InvalidArgument(
                "need at least one target and one ancilla qubit".into(),
            ));
        }
        let capacity = 1usize << n_ancilla;
        if n_outcomes < 2 {
            return Err(Error::InvalidArgument(
                "a POVM circuit needs at least two outcomes".into(),
            ));
        }
        if n_outcomes > capacity || n_outcomes <= capacity / 2 {
            return Err(Error::InvalidArgument(format!(
                "{n_outcomes} outcomes do not fit {n_ancilla} ancillas (need 2^(n_A-1) < l <= 2^n_A)"
            )));
        }
        if target_qubits.len() != n_target {
            return Err(Error::InvalidArgument(format!(
                "expected {} target qubit indices, got {}",
                n_target,
                target_qubits.len()
            )));
        }
        let mut sorted = target_qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != target_qubits.len() {
            return Err(Error::InvalidArgument(
                "target qubit indices must be distinct".into(),
            ));
        }
        Ok(Self {
            n_target,
            n_ancilla,
            n_outcomes,
            target_qubits,
        })
    }

    pub fn n_target(&self) -> usize {
        self.n_target
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    /// Number of labeled outcomes `l`.
    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    /// All simulated outcomes, `2^n_ancilla`; those at index `>= n_outcomes`
    /// are never rewarded by training and never selectable as labels.
    pub fn n_simulated_outcomes(&self) -> usize {
        1 << self.n_ancilla
    }

    pub fn target_qubits(&self) -> &[usize] {
        &self.target_qubits
    }

    pub fn target_dim(&self) -> usize {
        1 << self.n_target
    }

    pub fn param_count(&self) -> usize {
        param_count(self.n_target, self.n_ancilla)
    }
}

/// Circuit parameter vector.
///
/// Layout: for each block `j = 1..2^n_A - 1` in increasing order, first the
/// `4^n_T - 1` generator coefficients of `U_j`, then the `2^n_T` uniformly
/// controlled `R_y` angles of block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    n_target: usize,
    n_ancilla: usize,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn try_new(n_target: usize, n_ancilla: usize, values: Vec<f64>) -> Result<Self> {
        let expected = param_count(n_target, n_ancilla);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "parameter vector needs {expected} entries for n_T={n_target}, n_A={n_ancilla}; got {}",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "parameter vector has non-finite entries".into(),
            ));
        }
        Ok(Self {
            n_target,
            n_ancilla,
            values,
        })
    }

    pub fn zeros(n_target: usize, n_ancilla: usize) -> Self {
        Self {
            n_target,
            n_ancilla,
            values: vec![0.0; param_count(n_target, n_ancilla)],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_target(&self) -> usize {
        self.n_target
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    fn block_stride(&self) -> usize {
        (1 << (2 * self.n_target)) - 1 + (1 << self.n_target)
    }

    /// Generator coefficients of `U_j` (`j` is 1-based).
    pub fn unitary_coeffs(&self, j: usize) -> &[f64] {
        let start = (j - 1) * self.block_stride();
        &self.values[start..start + (1 << (2 * self.n_target)) - 1]
    }

    /// Uniformly controlled `R_y` angles of block `j` (1-based), one angle per
    /// target basis state.
    pub fn ry_angles(&self, j: usize) -> &[f64] {
        let start = (j - 1) * self.block_stride() + (1 << (2 * self.n_target)) - 1;
        &self.values[start..start + (1 << self.n_target)]
    }

    fn matches(&self, spec: &PovmCircuitSpec) -> Result<()> {
        if self.n_target != spec.n_target || self.n_ancilla != spec.n_ancilla {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector is for n_T={}, n_A={}, circuit wants n_T={}, n_A={}",
                self.n_target, self.n_ancilla, spec.n_target, spec.n_ancilla
            )));
        }
        Ok(())
    }
}

/// One measurement operator per simulated outcome, `sum K_m^dag K_m = I`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Max entrywise deviation of `sum K^dag K` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.operators[0].rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &self.operators {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// `E_m = K_m^dag K_m` for every outcome.
    pub fn to_povm(&self) -> PovmSet {
        let elements = self
            .operators
            .iter()
            .map(|k| k.adjoint().matmul(k).hermitian_part())
            .collect();
        PovmSet { elements }
    }
}

/// A set of PSD operators summing to the identity.
#[derive(Debug, Clone)]
pub struct PovmSet {
    elements: Vec<ComplexMatrix>,
}

impl PovmSet {
    /// Validates hermiticity, positive semi-definiteness, and completeness
    /// within [`POVM_TOL`].
    pub fn try_new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty POVM".into()))?
            .require_square()?;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &elements {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch(
                    "POVM elements differ in dimension".into(),
                ));
            }
            let defect = e.hermiticity_defect();
            if defect > POVM_TOL {
                return Err(Error::NotHermitian {
                    defect,
                    tol: POVM_TOL,
                });
            }
            let min = hermitian_eig(e)?.eigenvalues[0];
            if min < -POVM_TOL {
                return Err(Error::NotPsd(min));
            }
            sum = sum.add(e);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > POVM_TOL {
            return Err(Error::InvalidArgument(format!(
                "POVM elements sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Per-block gate data shared by the simulation and Kraus routes.
struct BlockGates {
    unitaries: Vec<ComplexMatrix>,
    angles: Vec<Vec<f64>>,
}

impl BlockGates {
    fn build(spec: &PovmCircuitSpec, theta: &ParamVector) -> Result<Self> {
        theta.matches(spec)?;
        let blocks = (1 << spec.n_ancilla) - 1;
        let mut unitaries = Vec::with_capacity(blocks);
        let mut angles = Vec::with_capacity(blocks);
        for j in 1..=blocks {
            unitaries.push(build_block_unitary(theta.unitary_coeffs(j))?);
            angles.push(theta.ry_angles(j).to_vec());
        }
        Ok(Self { unitaries, angles })
    }

    fn unitary(&self, j: usize) -> &ComplexMatrix {
        &self.unitaries[j - 1]
    }

    fn angles(&self, j: usize) -> &[f64] {
        &self.angles[j - 1]
    }
}

fn ry(theta: f64) -> ComplexMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]])
}

/// Run the circuit on an input register: ancillas are appended in `|0..0>`
/// and the block layers are applied in order `a = 1..n_A`.
pub fn apply_povm_circuit(
    input: &PureState,
    spec: &PovmCircuitSpec,
    theta: &ParamVector,
) -> Result<PureState> {
    let n_input = input.n_qubits();
    for &q in spec.target_qubits() {
        if q >= n_input {
            return Err(Error::DimensionMismatch(format!(
                "target qubit {q} outside input register of {n_input} qubits"
            )));
        }
    }
    let gates = BlockGates::build(spec, theta)?;

    let mut state = input.tensor(&PureState::computational(spec.n_ancilla, 0));
    for a in 1..=spec.n_ancilla {
        let ancilla_qubit = n_input + a - 1;
        for control_cfg in 0..1usize << (a - 1) {
            let j = (1 << (a - 1)) + control_cfg;
            let controls: Vec<(usize, u8)> = (0..a - 1)
                .map(|i| (n_input + i, ((control_cfg >> (a - 2 - i)) & 1) as u8))
                .collect();
            state.apply_gate_controlled(gates.unitary(j), spec.target_qubits(), &controls);
            for (t, &angle) in gates.angles(j).iter().enumerate() {
                let mut rotation_controls = controls.clone();
                for (bit, &q) in spec.target_qubits().iter().enumerate() {
                    rotation_controls.push((q, ((t >> (spec.n_target - 1 - bit)) & 1) as u8));
                }
                state.apply_gate_controlled(&ry(angle), &[ancilla_qubit], &rotation_controls);
            }
        }
    }
    Ok(state)
}

/// Outcome distribution of the ancilla measurement after the circuit.
///
/// The ancilla bits `z_1..z_n_A` are read as a decimal outcome with `z_1`
/// most significant; all `2^n_A` outcomes are reported.
pub fn outcome_probabilities(
    input: &PureState,
    spec: &PovmCircuitSpec,
    theta: &ParamVector,
) -> Result<Vec<f64>> {
    let state = apply_povm_circuit(input, spec, theta)?;
    let outcomes = spec.n_simulated_outcomes();
    let mut probs = vec![0.0; outcomes];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        probs[idx % outcomes] += amp.norm_sqr();
    }
    Ok(probs)
}

/// The Kraus operators of every simulated outcome, built as the layered
/// diagonal/unitary product with layer `a = 1` applied first.
pub fn kraus_operators(spec: &PovmCircuitSpec, theta: &ParamVector) -> Result<KrausSet> {
    let gates = BlockGates::build(spec, theta)?;
    let dim = spec.target_dim();
    let mut operators = Vec::with_capacity(spec.n_simulated_outcomes());
    for m in 0..spec.n_simulated_outcomes() {
        let bits: Vec<u8> = (0..spec.n_ancilla)
            .map(|a| ((m >> (spec.n_ancilla - 1 - a)) & 1) as u8)
            .collect();
        let mut k = ComplexMatrix::identity(dim);
        for a in 1..=spec.n_ancilla {
            let j = kraus_index(a, &bits[..a - 1]);
            let diag: Vec<Complex64> = gates
                .angles(j)
                .iter()
                .map(|&angle| {
                    let half = angle / 2.0;
                    let v = if bits[a - 1] == 0 { half.cos() } else { half.sin() };
                    Complex64::new(v, 0.0)
                })
                .collect();
            k = ComplexMatrix::diag(&diag).matmul(&gates.unitary(j).matmul(&k));
        }
        operators.push(k);
    }
    Ok(KrausSet { operators })
}

/// POVM elements `E_m = K_m^dag K_m` of the circuit at the given parameters.
pub fn povm_elements(spec: &PovmCircuitSpec, theta: &ParamVector) -> Result<PovmSet> {
    Ok(kraus_operators(spec, theta)?.to_povm())
}
