//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus the
//! spectral matrix functions built on it.
//!
//! The matrices here never exceed dimension 16, so a dependency-free Jacobi
//! sweep is both simple and accurate to machine precision. The rotation for a
//! Hermitian pair `(a_pp, a_pq, a_qq)` with `a_pq = r e^{i phi}` is the
//! unitary that is the identity except for
//!
//! ```text
//!   J_pp = c,  J_pq = -s e^{i phi},  J_qp = s e^{-i phi},  J_qq = c,
//! ```
//!
//! with `t = -sign(tau) / (|tau| + sqrt(1 + tau^2))`, `tau = (a_qq - a_pp)/(2r)`,
//! `c = 1/sqrt(1+t^2)`, `s = t c`, which zeroes `(J^dag A J)_pq`; `t` is the
//! smaller-magnitude root of `t^2 - 2 tau t - 1 = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::matrix::ComplexMatrix;

/// Off-diagonal magnitude below which a Jacobi sweep considers an entry zero.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;

/// Hermiticity tolerance accepted by [`hermitian_eig`]; the input is
/// symmetrized before decomposition.
pub const HERMITICITY_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// Projector onto the span of the eigenvector columns selected by `pick`.
    pub fn projector<F: Fn(f64) -> bool>(&self, pick: F) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        let mut p = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            if !pick(lambda) {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let vik = self.eigenvectors[(i, k)];
                    let vjk = self.eigenvectors[(j, k)];
                    p[(i, j)] += vik * vjk.conj();
                }
            }
        }
        p
    }

    /// Reassemble `V f(diag) V^dag`.
    pub fn apply_spectral<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fv = f(lambda);
            if fv == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * fv;
                }
            }
        }
        out
    }

    /// Reassemble `V f(diag) V^dag` for complex-valued f.
    pub fn apply_spectral_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fv = f(lambda);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * fv;
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input must be Hermitian within [`HERMITICITY_TOL`]; it is replaced by
/// its Hermitian part before the sweeps, so the decomposition is exact for the
/// symmetrized matrix. Eigenvalues come back ascending with unitary
/// eigenvector columns.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    let n = h.require_square()?;
    if !h.all_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            defect,
            tol: HERMITICITY_TOL,
        });
    }

    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(1.0);
    let tol = JACOBI_OFFDIAG_TOL * scale;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut max_off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                max_off = max_off.max(r);
                if r <= tol {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Column update A <- A J, where J touches columns p and q.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * s * phase.conj();
                    a[(i, q)] = -aip * s * phase + aiq * c;
                }
                // Row update A <- J^dag A.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * s * phase;
                    a[(q, j)] = -apj * s * phase.conj() + aqj * c;
                }
                // Force exact zeros and real diagonal on the rotated pair.
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                // Accumulate V <- V J.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * s * phase.conj();
                    v[(i, q)] = -vip * s * phase + viq * c;
                }
            }
        }
        if max_off <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigendecomposition did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    // Sort ascending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, dst)] = v[(i, src)];
        }
    }

    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(a)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Pseudo-inverse square root of a PSD matrix: eigenvalues above `kernel_tol`
/// map to `1/sqrt(lambda)`, the kernel maps to zero. A negative eigenvalue
/// below `-kernel_tol` is rejected.
pub fn psd_inv_sqrt(a: &ComplexMatrix, kernel_tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -kernel_tol {
            return Err(Error::NotPsd(min));
        }
    }
    Ok(eig.apply_spectral(|l| if l > kernel_tol { 1.0 / l.sqrt() } else { 0.0 }))
}

/// `exp(i H)` for Hermitian `H`, computed spectrally.
pub fn exp_i_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.apply_spectral_complex(|l| Complex64::new(l.cos(), l.sin())))
}
