//! Input-state preparation: single-qubit mixed states via purification,
//! the two-qubit quantum feature map for four-attribute data, attribute
//! rescaling, and Iris CSV ingestion.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{kron, pauli_x, pauli_z, ComplexMatrix, DensityMatrix, PureState, C_ZERO};

/// Bloch axis of a prepared mixed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "x" | "X" => Ok(Self::X),
            "y" | "Y" => Ok(Self::Y),
            "z" | "Z" => Ok(Self::Z),
            other => Err(Error::InvalidArgument(format!(
                "unknown Bloch axis {other:?} (expected x, y, or z)"
            ))),
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::X => write!(f, "x"),
            Self::Y => write!(f, "y"),
            Self::Z => write!(f, "z"),
        }
    }
}

/// A single-qubit mixed state `cos^2(angle) |a+><a+| + sin^2(angle) |a-><a-|`
/// along the chosen axis, described by its two-qubit purification circuit.
#[derive(Debug, Clone, Copy)]
pub struct MixedStateSpec {
    pub axis: PauliAxis,
    pub angle: f64,
}

/// Basis-change gate mapping `|0>, |1>` to the eigenstates of the chosen
/// Pauli axis: identity for z, Hadamard for x, phase-after-Hadamard for y.
fn axis_gate(axis: PauliAxis) -> ComplexMatrix {
    let h = ComplexMatrix::from_real_rows(&[
        &[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
        &[std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
    ]);
    match axis {
        PauliAxis::Z => ComplexMatrix::identity(2),
        PauliAxis::X => h,
        PauliAxis::Y => {
            let s = ComplexMatrix::from_rows(vec![
                vec![Complex64::new(1.0, 0.0), C_ZERO],
                vec![C_ZERO, Complex64::new(0.0, 1.0)],
            ]);
            s.matmul(&h)
        }
    }
}

/// Two-qubit purification `(U_axis ⊗ U_axis)(cos(angle)|00> + sin(angle)|11>)`.
///
/// Tracing out either qubit leaves the mixed state of the spec on the other.
pub fn prepare_rho_zeta(spec: &MixedStateSpec) -> PureState {
    let (c, s) = (spec.angle.cos(), spec.angle.sin());
    let mut state = PureState::from_amplitudes_unchecked(
        2,
        vec![
            Complex64::new(c, 0.0),
            C_ZERO,
            C_ZERO,
            Complex64::new(s, 0.0),
        ],
    );
    let u = axis_gate(spec.axis);
    state.apply_gate(&u, &[0]);
    state.apply_gate(&u, &[1]);
    state
}

/// The mixed state itself: the second qubit of the purification, reduced.
pub fn rho_zeta(spec: &MixedStateSpec) -> Result<DensityMatrix> {
    prepare_rho_zeta(spec).reduced_density(&[1])
}

/// Coefficients feeding the feature map: one single-operator phase per
/// attribute and one coupling phase per cyclically adjacent attribute pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureCoefficients {
    pub singles: [f64; 4],
    /// `pairs[g]` couples attributes `g` and `(g + 1) mod 4`.
    pub pairs: [f64; 4],
}

/// Inverse-cosine-product encoding:
/// `phi_j = x_j`, `phi_ij = pi / (3 cos(x_i) cos(x_j))`.
pub fn encode_invcoscos(x: &[f64; 4]) -> Result<FeatureCoefficients> {
    let mut pairs = [0.0; 4];
    for g in 0..4 {
        let denominator = x[g].cos() * x[(g + 1) % 4].cos();
        if denominator.abs() < 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "cos({}) * cos({}) too close to zero",
                x[g],
                x[(g + 1) % 4]
            )));
        }
        pairs[g] = std::f64::consts::PI / (3.0 * denominator);
    }
    Ok(FeatureCoefficients { singles: *x, pairs })
}

/// Gaussian-overlap encoding:
/// `phi_j = x_j`, `phi_ij = exp(|x_i - x_j|^2 ln(pi) / 8)`.
pub fn encode_gaussian(x: &[f64; 4]) -> FeatureCoefficients {
    let mut pairs = [0.0; 4];
    for g in 0..4 {
        let d = x[g] - x[(g + 1) % 4];
        pairs[g] = (d * d * std::f64::consts::PI.ln() / 8.0).exp();
    }
    FeatureCoefficients { singles: *x, pairs }
}

/// A named, interchangeable data-to-coefficient encoding.
pub trait EncodingFunction: Send + Sync {
    fn name(&self) -> &'static str;
    fn coefficients(&self, x: &[f64; 4]) -> Result<FeatureCoefficients>;
}

/// Registry entry for [`encode_invcoscos`].
pub struct InvCosCos;

impl EncodingFunction for InvCosCos {
    fn name(&self) -> &'static str {
        "invcoscos"
    }

    fn coefficients(&self, x: &[f64; 4]) -> Result<FeatureCoefficients> {
        encode_invcoscos(x)
    }
}

/// Registry entry for [`encode_gaussian`].
pub struct Gaussian;

impl EncodingFunction for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn coefficients(&self, x: &[f64; 4]) -> Result<FeatureCoefficients> {
        Ok(encode_gaussian(x))
    }
}

/// The available encodings, selectable by name at runtime.
pub const ENCODING_REGISTRY: [&'static dyn EncodingFunction; 2] = [&InvCosCos, &Gaussian];

/// Look up an encoding by its registered name.
pub fn encoder_by_name(name: &str) -> Option<&'static dyn EncodingFunction> {
    ENCODING_REGISTRY
        .iter()
        .copied()
        .find(|encoder| encoder.name() == name)
}

pub fn encoder_names() -> Vec<&'static str> {
    ENCODING_REGISTRY.iter().map(|e| e.name()).collect()
}

/// Number of feature-map layers found to work well for this data.
pub const DEFAULT_FEATURE_LAYERS: usize = 2;

fn pauli_operators() -> ([ComplexMatrix; 4], [ComplexMatrix; 4]) {
    let i2 = ComplexMatrix::identity(2);
    let singles = [
        kron(&pauli_x(), &i2),
        kron(&i2, &pauli_x()),
        kron(&pauli_z(), &i2),
        kron(&i2, &pauli_z()),
    ];
    // Products of cyclically adjacent singles: XX, ZX, ZZ, XZ.
    let couplings = [
        singles[0].matmul(&singles[1]),
        singles[1].matmul(&singles[2]),
        singles[2].matmul(&singles[3]),
        singles[3].matmul(&singles[0]),
    ];
    (singles, couplings)
}

/// `exp(i phi P)` applied to the amplitudes, using `P^2 = I`:
/// `cos(phi) v + i sin(phi) P v`.
fn apply_pauli_exponential(amps: &mut [Complex64], phi: f64, pauli: &ComplexMatrix) {
    let (c, s) = (phi.cos(), phi.sin());
    let rotated: Vec<Complex64> = (0..amps.len())
        .map(|row| {
            let mut pv = C_ZERO;
            for (col, &amp) in amps.iter().enumerate() {
                pv += pauli[(row, col)] * amp;
            }
            amps[row] * c + pv * Complex64::new(0.0, s)
        })
        .collect();
    amps.copy_from_slice(&rotated);
}

/// The two-qubit feature map: a leading `exp(i phi_1 P_1)` on `|00>` followed
/// by `layers` repetitions of the alternating single/coupling product, with
/// the first attribute's factor applied first in each layer.
pub fn feature_map(coeffs: &FeatureCoefficients, layers: usize) -> PureState {
    let (singles, couplings) = pauli_operators();
    let mut amps = vec![C_ZERO; 4];
    amps[0] = Complex64::new(1.0, 0.0);
    apply_pauli_exponential(&mut amps, coeffs.singles[0], &singles[0]);
    for _ in 0..layers {
        for g in 0..4 {
            apply_pauli_exponential(&mut amps, coeffs.singles[g], &singles[g]);
            apply_pauli_exponential(&mut amps, coeffs.pairs[g], &couplings[g]);
        }
    }
    PureState::from_amplitudes_unchecked(2, amps)
}

/// Four-attribute data points with ternary labels.
#[derive(Debug, Clone)]
pub struct IrisDataset {
    points: Vec<[f64; 4]>,
    labels: Vec<usize>,
    attr_min: [f64; 4],
    attr_max: [f64; 4],
}

impl IrisDataset {
    pub fn try_new(points: Vec<[f64; 4]>, labels: Vec<usize>) -> Result<Self> {
        if points.is_empty() || points.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "need equally many points and labels, got {} and {}",
                points.len(),
                labels.len()
            )));
        }
        let mut attr_min = [f64::INFINITY; 4];
        let mut attr_max = [f64::NEG_INFINITY; 4];
        for p in &points {
            for a in 0..4 {
                if !p[a].is_finite() {
                    return Err(Error::InvalidArgument(
                        "attribute values must be finite".into(),
                    ));
                }
                attr_min[a] = attr_min[a].min(p[a]);
                attr_max[a] = attr_max[a].max(p[a]);
            }
        }
        Ok(Self {
            points,
            labels,
            attr_min,
            attr_max,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn attr_min(&self) -> &[f64; 4] {
        &self.attr_min
    }

    pub fn attr_max(&self) -> &[f64; 4] {
        &self.attr_max
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let n_classes = self.labels.iter().max().copied().unwrap_or(0) + 1;
        let mut counts = vec![0; n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Target half-range of the rescaled attributes.
pub const RESCALE_BOUND: f64 = std::f64::consts::PI / 5.0;

/// Affine per-attribute rescaling onto `[-pi/5, pi/5]`, using the min/max of
/// the full dataset: `x' = (pi/5)(2x - (min + max)) / (max - min)`.
pub fn rescale(raw: &IrisDataset) -> Result<IrisDataset> {
    for a in 0..4 {
        if raw.attr_max[a] - raw.attr_min[a] <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "attribute {a} is constant; cannot rescale"
            )));
        }
    }
    let points = raw
        .points
        .iter()
        .map(|p| {
            let mut out = [0.0; 4];
            for a in 0..4 {
                let (lo, hi) = (raw.attr_min[a], raw.attr_max[a]);
                out[a] = RESCALE_BOUND * (2.0 * p[a] - (lo + hi)) / (hi - lo);
            }
            out
        })
        .collect();
    IrisDataset::try_new(points, raw.labels.clone())
}

fn species_label(token: &str) -> Option<usize> {
    match token {
        "setosa" => Some(0),
        "versicolor" => Some(1),
        "virginica" => Some(2),
        _ => None,
    }
}

/// Parse CSV rows `sepal_length,sepal_width,petal_length,petal_width,species`.
///
/// An optional header line is detected by a non-numeric first field. Line
/// numbers in errors are 1-based over the whole file.
pub fn parse_iris(content: &str) -> Result<IrisDataset> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (idx, raw_line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 5 comma-separated fields, found {}", fields.len()),
            });
        }
        if idx == 0 && fields[0].parse::<f64>().is_err() {
            // Header row.
            continue;
        }
        let mut point = [0.0; 4];
        for (a, field) in fields[..4].iter().enumerate() {
            point[a] = field.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("attribute {} is not a number: {field:?}", a + 1),
            })?;
        }
        let label = species_label(fields[4]).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("unknown species {:?}", fields[4]),
        })?;
        points.push(point);
        labels.push(label);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    IrisDataset::try_new(points, labels)
}

/// Load and parse an Iris CSV file.
pub fn load_iris(path: &Path) -> Result<IrisDataset> {
    let content = fs::read_to_string(path)?;
    parse_iris(&content)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{partial_trace, pauli_y};

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn rho_zeta_z_axis_endpoints() {
        let state = prepare_rho_zeta(&MixedStateSpec {
            axis: PauliAxis::Z,
            angle: 0.0,
        });
        assert!((state.amplitudes()[0].re - 1.0).abs() < 1e-14);

        let reduced = state.reduced_density(&[1]).unwrap();
        let expect = PureState::computational(1, 0).to_density();
        assert!(reduced.matrix().max_abs_diff(expect.matrix()) < 1e-14);
    }

    #[test]
    fn rho_zeta_bell_point_is_maximally_mixed() {
        let state = prepare_rho_zeta(&MixedStateSpec {
            axis: PauliAxis::Z,
            angle: std::f64::consts::FRAC_PI_4,
        });
        for (i, expect) in [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2].iter().enumerate() {
            assert!((state.amplitudes()[i].re - expect).abs() < 1e-14);
        }
        let reduced = rho_zeta(&MixedStateSpec {
            axis: PauliAxis::Z,
            angle: std::f64::consts::FRAC_PI_4,
        })
        .unwrap();
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(reduced.matrix().max_abs_diff(&half) < 1e-14);
    }

    #[test]
    fn rho_zeta_x_axis_mixture() {
        // Partial-trace oracle: cos^2 |+><+| + sin^2 |-><-| at angle pi/6.
        let angle = std::f64::consts::FRAC_PI_6;
        let spec = MixedStateSpec {
            axis: PauliAxis::X,
            angle,
        };
        let reduced = rho_zeta(&spec).unwrap();

        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let minus = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]);
        let expect = plus
            .scale_re(angle.cos().powi(2))
            .add(&minus.scale_re(angle.sin().powi(2)));
        assert!(reduced.matrix().max_abs_diff(&expect) < 1e-12);

        // Same state through the generic partial trace.
        let via_full = partial_trace(
            &prepare_rho_zeta(&spec).to_density(),
            &[2, 2],
            &[1],
        )
        .unwrap();
        assert!(reduced.matrix().max_abs_diff(via_full.matrix()) < 1e-14);
    }

    #[test]
    fn rho_zeta_bloch_vector_stays_on_axis() {
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        for (axis, along) in [(PauliAxis::X, 0), (PauliAxis::Y, 1), (PauliAxis::Z, 2)] {
            for k in 0..7 {
                let angle = 0.37 * k as f64;
                let rho = rho_zeta(&MixedStateSpec { axis, angle }).unwrap();
                let bloch: Vec<f64> = paulis
                    .iter()
                    .map(|p| rho.matrix().trace_product_re(p))
                    .collect();
                for (i, &component) in bloch.iter().enumerate() {
                    if i == along {
                        assert!((component - (2.0 * angle).cos()).abs() < 1e-12);
                    } else {
                        assert!(component.abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn invcoscos_examples() {
        let zero = encode_invcoscos(&[0.0; 4]).unwrap();
        assert_eq!(zero.singles, [0.0; 4]);
        for p in zero.pairs {
            assert!((p - std::f64::consts::PI / 3.0).abs() < 1e-14);
        }

        let b = RESCALE_BOUND;
        let at_edge = encode_invcoscos(&[b; 4]).unwrap();
        let expect = std::f64::consts::PI / (3.0 * b.cos() * b.cos());
        for p in at_edge.pairs {
            assert!((p - expect).abs() < 1e-14);
        }

        // Symmetric in the pair: swapping the two attribute values of a pair
        // leaves the coupling coefficient unchanged.
        let a = encode_invcoscos(&[0.1, 0.5, 0.0, 0.0]).unwrap();
        let swapped = encode_invcoscos(&[0.5, 0.1, 0.0, 0.0]).unwrap();
        assert!((a.pairs[0] - swapped.pairs[0]).abs() < 1e-14);

        assert!(encode_invcoscos(&[std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gaussian_examples() {
        let same = encode_gaussian(&[0.3; 4]);
        for p in same.pairs {
            assert!((p - 1.0).abs() < 1e-14);
        }

        // |x_i - x_j| = 2 sqrt(2) makes the exponent ln(pi).
        let d = 2.0 * std::f64::consts::SQRT_2;
        let x = [0.0, d, 0.0, d];
        let enc = encode_gaussian(&x);
        for p in enc.pairs {
            assert!((p - std::f64::consts::PI).abs() < 1e-12);
        }

        for k in 0..20 {
            let x = [0.1 * k as f64, -0.05 * k as f64, 0.3, -0.2];
            for p in encode_gaussian(&x).pairs {
                assert!(p >= 1.0);
            }
        }
    }

    #[test]
    fn feature_map_zero_coefficients_is_identity() {
        let coeffs = FeatureCoefficients {
            singles: [0.0; 4],
            pairs: [0.0; 4],
        };
        let state = feature_map(&coeffs, DEFAULT_FEATURE_LAYERS);
        assert!((state.amplitudes()[0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn feature_map_diagonal_generator_only_phases() {
        // P_3 = Z tensor I is diagonal: |00> only picks up a global phase.
        let coeffs = FeatureCoefficients {
            singles: [0.0, 0.0, 0.9, 0.0],
            pairs: [0.0; 4],
        };
        let state = feature_map(&coeffs, 1);
        assert!((state.amplitudes()[0].norm() - 1.0).abs() < 1e-14);
        for amp in &state.amplitudes()[1..] {
            assert!(amp.norm() < 1e-14);
        }
    }

    #[test]
    fn feature_map_single_x_rotation() {
        // Only phi_1 = pi/4 with one layer: the prefactor and the layer each
        // apply exp(i pi/4 X ⊗ I), composing to exp(i pi/2 X) ⊗ I, which maps
        // |00> to i|10>.
        let coeffs = FeatureCoefficients {
            singles: [std::f64::consts::FRAC_PI_4, 0.0, 0.0, 0.0],
            pairs: [0.0; 4],
        };
        let state = feature_map(&coeffs, 1);
        assert!(state.amplitudes()[0].norm() < 1e-14);
        assert!((state.amplitudes()[2] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn feature_map_preserves_norm() {
        let mut rng = crate::rng::SplitMix64::new(314);
        for _ in 0..1000 {
            let coeffs = FeatureCoefficients {
                singles: std::array::from_fn(|_| rng.uniform(-2.0, 2.0)),
                pairs: std::array::from_fn(|_| rng.uniform(-2.0, 2.0)),
            };
            let state = feature_map(&coeffs, 2);
            assert!((state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn encoder_registry_lookup() {
        assert_eq!(encoder_by_name("invcoscos").unwrap().name(), "invcoscos");
        assert_eq!(encoder_by_name("gaussian").unwrap().name(), "gaussian");
        assert!(encoder_by_name("fourier").is_none());
        assert_eq!(encoder_names(), vec!["invcoscos", "gaussian"]);
    }

    #[test]
    fn rescale_endpoints_and_idempotence() {
        let points = vec![
            [1.0, 10.0, -3.0, 0.0],
            [3.0, 20.0, -1.0, 2.0],
            [2.0, 15.0, -2.0, 1.0],
        ];
        let data = IrisDataset::try_new(points, vec![0, 1, 2]).unwrap();
        let scaled = rescale(&data).unwrap();
        for p in scaled.points() {
            for v in p {
                assert!(v.abs() <= RESCALE_BOUND + 1e-12);
            }
        }
        // min -> -pi/5, max -> +pi/5, midpoint -> 0
        assert!((scaled.points()[0][0] + RESCALE_BOUND).abs() < 1e-12);
        assert!((scaled.points()[1][0] - RESCALE_BOUND).abs() < 1e-12);
        assert!(scaled.points()[2][0].abs() < 1e-12);

        let twice = rescale(&scaled).unwrap();
        for (a, b) in twice.points().iter().zip(scaled.points()) {
            for k in 0..4 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }

        // Order preserved per attribute.
        assert!(scaled.points()[0][1] < scaled.points()[2][1]);
        assert!(scaled.points()[2][1] < scaled.points()[1][1]);
    }

    #[test]
    fn rescale_rejects_constant_attribute() {
        let data =
            IrisDataset::try_new(vec![[1.0, 5.0, 0.0, 2.0], [2.0, 5.0, 1.0, 3.0]], vec![0, 1])
                .unwrap();
        assert!(rescale(&data).is_err());
    }

    #[test]
    fn parse_iris_happy_path_and_errors() {
        let csv = "sepal_length,sepal_width,petal_length,petal_width,species\n\
                   5.1,3.5,1.4,0.2,setosa\n\
                   6.2,2.9,4.3,1.3,versicolor\n\
                   7.2,3.0,5.8,1.6,virginica\n";
        let data = parse_iris(csv).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.labels(), &[0, 1, 2]);

        assert!(matches!(parse_iris(""), Err(Error::Parse { .. })));

        let bad_species = "5.1,3.5,1.4,0.2,sibirica\n";
        match parse_iris(bad_species) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("sibirica"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let bad_columns = "5.1,3.5,1.4,setosa\n";
        assert!(matches!(
            parse_iris(bad_columns),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
