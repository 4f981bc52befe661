//! Dense complex linear algebra for few-qubit simulation: matrix arithmetic,
//! Kronecker and partial-trace structure, and Hermitian spectral routines.

mod eig;
mod matrix;
mod state;

pub use eig::{
    exp_i_hermitian, hermitian_eig, psd_inv_sqrt, trace_norm, HermitianEig, HERMITICITY_TOL,
    JACOBI_OFFDIAG_TOL,
};
pub use matrix::{kron, ComplexMatrix, C_I, C_ONE, C_ZERO};
pub use num_complex::Complex64;
pub use state::{partial_trace, DensityMatrix, PureState, STATE_TOL};

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(vec![
        vec![C_ZERO, Complex64::new(0.0, -1.0)],
        vec![C_I, C_ZERO],
    ])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        // XY = iZ
        assert!(x.matmul(&y).max_abs_diff(&z.scale(C_I)) < 1e-15);
        for p in [&x, &y, &z] {
            assert!(p.matmul(p).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
            assert!(p.hermiticity_defect() < 1e-15);
        }
    }
}
