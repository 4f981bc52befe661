//! Pure states, density matrices, and the partial trace.
//!
//! Qubit 0 is the most significant bit of a basis index, so a register
//! `|q0 q1 ... q_{n-1}>` maps to index `sum q_i 2^{n-1-i}` and appending a
//! register extends indices on the low side.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::eig::hermitian_eig;
use crate::qmath::matrix::{ComplexMatrix, C_ONE, C_ZERO};

/// Validation tolerance shared by the state types: hermiticity, unit trace,
/// unit norm, and PSD slack.
pub const STATE_TOL: f64 = 1e-10;

/// Normalized multi-qubit state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn try_new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "state on {} qubits needs {} amplitudes, got {}",
                n_qubits,
                1usize << n_qubits,
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "state vector squared norm {norm_sq} is not 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn computational(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C_ZERO; 1 << n_qubits];
        amplitudes[index] = C_ONE;
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// Construct without the norm check; for internal unitary evolution.
    pub(crate) fn from_amplitudes_unchecked(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self> ⊗ |other>`; the appended register occupies the low bits.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        }
    }

    /// Outer product `|psi><psi|` as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            matrix: m,
        }
    }

    /// Apply a `2^k`-dimensional gate to the ordered qubit list `targets`
    /// (first entry = most significant gate bit), restricted to the subspace
    /// where every `(qubit, bit)` pair in `controls` matches.
    pub fn apply_gate_controlled(
        &mut self,
        gate: &ComplexMatrix,
        targets: &[usize],
        controls: &[(usize, u8)],
    ) {
        let k = targets.len();
        let gd = 1usize << k;
        assert_eq!(gate.rows(), gd, "gate dimension mismatch");
        assert!(gate.is_square());
        let n = self.n_qubits;
        let weight = |q: usize| 1usize << (n - 1 - q);
        let target_mask: usize = targets.iter().map(|&q| weight(q)).sum();
        let ctrl_mask: usize = controls.iter().map(|&(q, _)| weight(q)).sum();
        let ctrl_value: usize = controls
            .iter()
            .filter(|&&(_, b)| b == 1)
            .map(|&(q, _)| weight(q))
            .sum();

        let mut gathered = vec![C_ZERO; gd];
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 || base & ctrl_mask != ctrl_value {
                continue;
            }
            for (t, slot) in gathered.iter_mut().enumerate() {
                let mut idx = base;
                for (bit, &q) in targets.iter().enumerate() {
                    if (t >> (k - 1 - bit)) & 1 == 1 {
                        idx |= weight(q);
                    }
                }
                *slot = self.amplitudes[idx];
            }
            for (row, _) in gathered.iter().enumerate() {
                let mut idx = base;
                for (bit, &q) in targets.iter().enumerate() {
                    if (row >> (k - 1 - bit)) & 1 == 1 {
                        idx |= weight(q);
                    }
                }
                let mut acc = C_ZERO;
                for (col, &amp) in gathered.iter().enumerate() {
                    acc += gate[(row, col)] * amp;
                }
                self.amplitudes[idx] = acc;
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &ComplexMatrix, targets: &[usize]) {
        self.apply_gate_controlled(gate, targets, &[]);
    }

    /// Reduced density matrix on the ordered qubit list `keep` (first entry =
    /// most significant bit of the reduced space).
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        validate_subsystem(keep, n)?;
        let k = keep.len();
        let rd = 1usize << k;
        let weight = |q: usize| 1usize << (n - 1 - q);
        let keep_mask: usize = keep.iter().map(|&q| weight(q)).sum();

        let compose = |kept: usize, rest: usize| -> usize {
            let mut idx = rest;
            for (bit, &q) in keep.iter().enumerate() {
                if (kept >> (k - 1 - bit)) & 1 == 1 {
                    idx |= weight(q);
                }
            }
            idx
        };

        let mut m = ComplexMatrix::zeros(rd, rd);
        for rest in 0..self.amplitudes.len() {
            if rest & keep_mask != 0 {
                continue;
            }
            for a in 0..rd {
                let ia = compose(a, rest);
                for b in 0..rd {
                    let ib = compose(b, rest);
                    m[(a, b)] += self.amplitudes[ia] * self.amplitudes[ib].conj();
                }
            }
        }
        Ok(DensityMatrix {
            matrix: m,
        })
    }
}

fn validate_subsystem(keep: &[usize], n_subsystems: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("kept subsystem set is empty".into()));
    }
    for &q in keep {
        if q >= n_subsystems {
            return Err(Error::InvalidArgument(format!(
                "subsystem index {q} out of range (have {n_subsystems})"
            )));
        }
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidArgument(
            "kept subsystem indices contain duplicates".into(),
        ));
    }
    Ok(())
}

/// Hermitian, PSD, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn try_new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_square()?;
        if !matrix.all_finite() {
            return Err(Error::InvalidArgument(
                "density matrix has non-finite entries".into(),
            ));
        }
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian {
                defect,
                tol: STATE_TOL,
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    /// Convex mixture `sum_i w_i rho_i` of density matrices.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?
            .1
            .dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &(w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch(
                    "mixture components differ in dimension".into(),
                ));
            }
            m = m.add(&rho.matrix.scale_re(w));
        }
        Self::try_new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Partial trace of a density matrix over the subsystems not in `keep`.
///
/// `subsystem_dims` lists the dimension of each tensor factor (most
/// significant factor first); their product must equal the matrix dimension.
/// `keep` selects the factors to retain, in ascending order of appearance.
pub fn partial_trace(
    rho: &DensityMatrix,
    subsystem_dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix> {
    let total: usize = subsystem_dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims multiply to {total}, matrix dimension is {}",
            rho.dim()
        )));
    }
    validate_subsystem(keep, subsystem_dims.len())?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();

    let n = subsystem_dims.len();
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let strides: Vec<usize> = (0..n)
        .map(|i| subsystem_dims[i + 1..].iter().product())
        .collect();
    let keep_dim: usize = keep.iter().map(|&i| subsystem_dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| subsystem_dims[i]).product();

    // Decompose a flat index over the listed subsystems into a full index.
    let compose = |subsys: &[usize], mut flat: usize| -> usize {
        let mut idx = 0;
        for &s in subsys.iter().rev() {
            idx += (flat % subsystem_dims[s]) * strides[s];
            flat /= subsystem_dims[s];
        }
        idx
    };

    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for a in 0..keep_dim {
        let ia = compose(&keep, a);
        for b in 0..keep_dim {
            let ib = compose(&keep, b);
            let mut acc = C_ZERO;
            for e in 0..traced_dim {
                let t = compose(&traced, e);
                acc += rho.matrix()[(ia + t, ib + t)];
            }
            out[(a, b)] = acc;
        }
    }
    DensityMatrix::try_new(out)
}
