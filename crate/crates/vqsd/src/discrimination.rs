//! Minimum-error state discrimination quantities and baselines.
//!
//! For an ensemble `{(q_m, rho_m)}` measured with a POVM `{E_m}` the error
//! probability is `1 - sum_m q_m Tr[rho_m E_m]`. Two analytic baselines are
//! implemented — the Helstrom measurement for two states and the pretty-good
//! measurement for any number — together with an optimality certificate for
//! the known necessary-and-sufficient conditions and a brute-force grid
//! oracle over single-qubit projective measurements.

use crate::circuit::PovmSet;
use crate::error::{Error, Result};
use crate::qmath::{hermitian_eig, psd_inv_sqrt, ComplexMatrix, DensityMatrix};

/// Kernel cutoff for the pretty-good measurement pseudo-inverse.
pub const PGM_KERNEL_TOL: f64 = 1e-12;

/// Eigenvalues of the Helstrom operator within this band count as ties and
/// are assigned to the first projector.
const HELSTROM_TIE_TOL: f64 = 1e-12;

/// States with a-priori probabilities.
#[derive(Debug, Clone)]
pub struct LabeledEnsemble {
    states: Vec<DensityMatrix>,
    priors: Vec<f64>,
}

impl LabeledEnsemble {
    pub fn try_new(states: Vec<DensityMatrix>, priors: Vec<f64>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidArgument(
                "an ensemble needs at least two states".into(),
            ));
        }
        if states.len() != priors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "ensemble states differ in dimension".into(),
            ));
        }
        if priors.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
            return Err(Error::InvalidArgument("priors must be nonnegative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "priors sum to {total}, expected 1"
            )));
        }
        Ok(Self { states, priors })
    }

    /// Equal priors over the given states.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let q = 1.0 / states.len() as f64;
        let priors = vec![q; states.len()];
        Self::try_new(states, priors)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Prior-weighted average state `sum_m q_m rho_m`.
    pub fn average_state(&self) -> ComplexMatrix {
        let mut avg = ComplexMatrix::zeros(self.dim(), self.dim());
        for (rho, &q) in self.states.iter().zip(&self.priors) {
            avg = avg.add(&rho.matrix().scale_re(q));
        }
        avg
    }
}

/// Average probability of misidentifying the state, `1 - sum_m q_m Tr[rho_m E_m]`.
///
/// The POVM may carry more elements than the ensemble has states; the extra
/// outcomes are never credited.
pub fn error_probability(ens: &LabeledEnsemble, povm: &PovmSet) -> Result<f64> {
    if povm.dim() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVM dimension {} vs ensemble dimension {}",
            povm.dim(),
            ens.dim()
        )));
    }
    if povm.len() < ens.len() {
        return Err(Error::InvalidArgument(format!(
            "POVM has {} elements for {} states",
            povm.len(),
            ens.len()
        )));
    }
    let mut success = 0.0;
    for (m, (rho, &q)) in ens.states.iter().zip(&ens.priors).enumerate() {
        success += q * rho.matrix().trace_product_re(&povm.elements()[m]);
    }
    Ok(1.0 - success)
}

/// Optimal two-state measurement.
#[derive(Debug, Clone)]
pub struct HelstromResult {
    /// Minimum achievable error probability.
    pub bound: f64,
    /// Projector assigned to the first state.
    pub e0: ComplexMatrix,
    /// Projector assigned to the second state.
    pub e1: ComplexMatrix,
    /// Spectrum of `q0 rho0 - q1 rho1`, ascending.
    pub lambda: Vec<f64>,
}

impl HelstromResult {
    pub fn povm(&self) -> Result<PovmSet> {
        PovmSet::try_new(vec![self.e0.clone(), self.e1.clone()])
    }
}

/// Minimum-error measurement for two states: spectral split of
/// `Lambda = q0 rho0 - q1 rho1` with `bound = 1/2 - Tr|Lambda| / 2`.
///
/// Eigenvectors with `|lambda| <= 1e-12` go to `e0` so the output is
/// deterministic when the split is degenerate.
pub fn helstrom(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    q0: f64,
    q1: f64,
) -> Result<HelstromResult> {
    if (q0 + q1 - 1.0).abs() > 1e-10 || q0 < 0.0 || q1 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "priors ({q0}, {q1}) must be nonnegative and sum to 1"
        )));
    }
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch(
            "two-state ensemble states differ in dimension".into(),
        ));
    }
    let lambda_op = rho0.matrix().scale_re(q0).sub(&rho1.matrix().scale_re(q1));
    let eig = hermitian_eig(&lambda_op)?;
    let abs_sum: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
    let bound = 0.5 - 0.5 * abs_sum;
    let e0 = eig.projector(|l| l >= -HELSTROM_TIE_TOL);
    let e1 = eig.projector(|l| l < -HELSTROM_TIE_TOL);
    Ok(HelstromResult {
        bound,
        e0,
        e1,
        lambda: eig.eigenvalues,
    })
}

/// The pretty-good measurement `Pi_m = q_m rho^{-1/2} rho_m rho^{-1/2}` built
/// from the ensemble average `rho`.
///
/// When `rho` is rank-deficient the elements only sum to the projector onto
/// its support; the deficit `I - P_support` is appended as an extra element
/// that carries no label.
pub fn pretty_good_measurement(ens: &LabeledEnsemble) -> Result<PovmSet> {
    let avg = ens.average_state();
    let inv_sqrt = psd_inv_sqrt(&avg, PGM_KERNEL_TOL)?;
    let mut elements: Vec<ComplexMatrix> = Vec::with_capacity(ens.len() + 1);
    let mut sum = ComplexMatrix::zeros(ens.dim(), ens.dim());
    for (rho, &q) in ens.states().iter().zip(ens.priors()) {
        let pi = inv_sqrt
            .matmul(rho.matrix())
            .matmul(&inv_sqrt)
            .scale_re(q)
            .hermitian_part();
        sum = sum.add(&pi);
        elements.push(pi);
    }
    let deficit = ComplexMatrix::identity(ens.dim()).sub(&sum);
    if deficit.max_abs() > 1e-10 {
        elements.push(deficit.hermitian_part());
    }
    PovmSet::try_new(elements)
}

/// Optimality check of a POVM against an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// `max_{m,n} max-entry |E_m (q_m rho_m - q_n rho_n) E_n|`.
    pub pairwise_residual_max: f64,
    /// `min_n` of the smallest eigenvalue of the Hermitized
    /// `sum_m q_m E_m rho_m - q_n rho_n`.
    pub dual_min_eigenvalue: f64,
    /// Tolerance the report was evaluated at.
    pub tol: f64,
    pub pass: bool,
}

/// Evaluate the necessary-and-sufficient optimality conditions for
/// minimum-error discrimination on the first `l` POVM elements, where `l` is
/// the ensemble size.
///
/// The operator `sum_m q_m E_m rho_m` is only Hermitian at the optimum, so
/// its Hermitian part is used, which agrees there and is well defined
/// everywhere.
pub fn optimality_certificate(
    ens: &LabeledEnsemble,
    povm: &PovmSet,
    tol: f64,
) -> Result<CertificateReport> {
    if povm.dim() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVM dimension {} vs ensemble dimension {}",
            povm.dim(),
            ens.dim()
        )));
    }
    if povm.len() < ens.len() {
        return Err(Error::InvalidArgument(format!(
            "POVM has {} elements for {} states",
            povm.len(),
            ens.len()
        )));
    }
    let l = ens.len();
    let weighted: Vec<ComplexMatrix> = ens
        .states()
        .iter()
        .zip(ens.priors())
        .map(|(rho, &q)| rho.matrix().scale_re(q))
        .collect();

    let mut pairwise_residual_max = 0.0f64;
    for m in 0..l {
        for n in 0..l {
            if m == n {
                continue;
            }
            let residual = povm.elements()[m]
                .matmul(&weighted[m].sub(&weighted[n]))
                .matmul(&povm.elements()[n]);
            pairwise_residual_max = pairwise_residual_max.max(residual.max_abs());
        }
    }

    let mut gamma = ComplexMatrix::zeros(ens.dim(), ens.dim());
    for m in 0..l {
        gamma = gamma.add(&povm.elements()[m].matmul(&weighted[m]));
    }
    let gamma_h = gamma.hermitian_part();
    let mut dual_min_eigenvalue = f64::INFINITY;
    for w in &weighted {
        let eig = hermitian_eig(&gamma_h.sub(w))?;
        dual_min_eigenvalue = dual_min_eigenvalue.min(eig.eigenvalues[0]);
    }

    Ok(CertificateReport {
        pairwise_residual_max,
        dual_min_eigenvalue,
        tol,
        pass: pairwise_residual_max <= tol && dual_min_eigenvalue >= -tol,
    })
}

/// Independent oracle for two single-qubit states: minimum error over
/// projective measurements `{P(n), I - P(n)}` with the Bloch direction `n`
/// scanned over a `grid_size x grid_size` polar-azimuthal grid.
///
/// Deliberately avoids the eigendecomposition path: each grid point evaluates
/// plain 2x2 traces.
pub fn brute_force_two_state(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    q0: f64,
    q1: f64,
    grid_size: usize,
) -> Result<f64> {
    if rho0.dim() != 2 || rho1.dim() != 2 {
        return Err(Error::InvalidArgument(
            "grid oracle only covers single-qubit states".into(),
        ));
    }
    if (q0 + q1 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("priors must sum to 1".into()));
    }
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid size must be at least 2".into()));
    }

    let trace_with = |rho: &DensityMatrix, p: &[[f64; 2]; 4]| {
        // Re Tr(rho P) with P packed as [[re,im]; 4] row-major.
        let m = rho.matrix();
        let mut acc = 0.0;
        for i in 0..2 {
            for k in 0..2 {
                let r = m[(i, k)];
                let p_ki = p[k * 2 + i];
                acc += r.re * p_ki[0] - r.im * p_ki[1];
            }
        }
        acc
    };

    let mut best = f64::INFINITY;
    for i in 0..grid_size {
        let polar = std::f64::consts::PI * i as f64 / (grid_size - 1) as f64;
        for j in 0..grid_size {
            let azimuth = 2.0 * std::f64::consts::PI * j as f64 / grid_size as f64;
            let (nx, ny, nz) = (
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            );
            // P = (I + n . sigma)/2
            let p = [
                [(1.0 + nz) / 2.0, 0.0],
                [nx / 2.0, -ny / 2.0],
                [nx / 2.0, ny / 2.0],
                [(1.0 - nz) / 2.0, 0.0],
            ];
            let success = q0 * trace_with(rho0, &p) + q1 * (1.0 - trace_with(rho1, &p));
            best = best.min(1.0 - success);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::PureState;
    use num_complex::Complex64;

    fn ket(amplitudes: &[f64]) -> DensityMatrix {
        let n = amplitudes.len().trailing_zeros() as usize;
        let amps: Vec<Complex64> = amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        PureState::try_new(n, amps).unwrap().to_density()
    }

    fn zero() -> DensityMatrix {
        ket(&[1.0, 0.0])
    }

    fn one() -> DensityMatrix {
        ket(&[0.0, 1.0])
    }

    fn plus() -> DensityMatrix {
        let v = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[v, v])
    }

    #[test]
    fn error_probability_orthogonal_states() {
        let ens = LabeledEnsemble::uniform(vec![zero(), one()]).unwrap();
        let povm = PovmSet::try_new(vec![zero().into_matrix(), one().into_matrix()]).unwrap();
        assert!(error_probability(&ens, &povm).unwrap().abs() < 1e-14);
    }

    #[test]
    fn error_probability_three_states_with_null_element() {
        // With E2 = 0 only the |+> state is ever missed: error = 1/3.
        let ens = LabeledEnsemble::uniform(vec![zero(), one(), plus()]).unwrap();
        let povm = PovmSet::try_new(vec![
            zero().into_matrix(),
            one().into_matrix(),
            ComplexMatrix::zeros(2, 2),
        ])
        .unwrap();
        let err = error_probability(&ens, &povm).unwrap();
        assert!((err - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn error_probability_maximally_mixed_povm() {
        let ens = LabeledEnsemble::uniform(vec![zero(), one(), plus()]).unwrap();
        let third = ComplexMatrix::identity(2).scale_re(1.0 / 3.0);
        let povm = PovmSet::try_new(vec![third.clone(), third.clone(), third]).unwrap();
        let err = error_probability(&ens, &povm).unwrap();
        assert!((err - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn helstrom_orthogonal_pair() {
        let r = helstrom(&zero(), &one(), 0.5, 0.5).unwrap();
        assert!(r.bound.abs() < 1e-12);
        assert!(r.e0.max_abs_diff(zero().matrix()) < 1e-12);
        assert!(r.e1.max_abs_diff(one().matrix()) < 1e-12);
    }

    #[test]
    fn helstrom_zero_vs_plus() {
        // 2x2 eigendecomposition of (|0><0| - |+><+|)/2 gives
        // bound = (1 - 1/sqrt(2)) / 2.
        let r = helstrom(&zero(), &plus(), 0.5, 0.5).unwrap();
        let expect = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        assert!((r.bound - expect).abs() < 1e-12);

        // The projectors achieve the bound.
        let ens = LabeledEnsemble::uniform(vec![zero(), plus()]).unwrap();
        let err = error_probability(&ens, &r.povm().unwrap()).unwrap();
        assert!((err - r.bound).abs() < 1e-10);
    }

    #[test]
    fn helstrom_rejects_bad_priors() {
        assert!(helstrom(&zero(), &one(), 0.7, 0.7).is_err());
    }

    #[test]
    fn pgm_orthogonal_states_is_projective() {
        let ens = LabeledEnsemble::uniform(vec![zero(), one()]).unwrap();
        let pgm = pretty_good_measurement(&ens).unwrap();
        assert_eq!(pgm.len(), 2);
        assert!(pgm.elements()[0].max_abs_diff(zero().matrix()) < 1e-10);
        assert!(pgm.elements()[1].max_abs_diff(one().matrix()) < 1e-10);
        assert!(error_probability(&ens, &pgm).unwrap().abs() < 1e-10);
    }

    #[test]
    fn pgm_matches_helstrom_for_two_equiprobable_pure_states() {
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let psi = ket(&[c, s]);
        let ens = LabeledEnsemble::uniform(vec![zero(), psi.clone()]).unwrap();
        let pgm_err = error_probability(&ens, &pretty_good_measurement(&ens).unwrap()).unwrap();
        let bound = helstrom(&zero(), &psi, 0.5, 0.5).unwrap().bound;
        assert!((pgm_err - bound).abs() < 1e-10);
    }

    #[test]
    fn pgm_is_suboptimal_for_three_states() {
        let ens = LabeledEnsemble::uniform(vec![zero(), one(), plus()]).unwrap();
        let pgm_err = error_probability(&ens, &pretty_good_measurement(&ens).unwrap()).unwrap();
        assert!(pgm_err > 1.0 / 3.0 + 1e-3);
    }

    #[test]
    fn pgm_completion_on_rank_deficient_average() {
        // Two copies of |0><0|: the average has rank 1, so a completion
        // element must be appended to restore sum = I.
        let ens = LabeledEnsemble::uniform(vec![zero(), zero()]).unwrap();
        let pgm = pretty_good_measurement(&ens).unwrap();
        assert_eq!(pgm.len(), 3);
        assert!(pgm.elements()[2].max_abs_diff(one().matrix()) < 1e-10);
    }

    #[test]
    fn certificate_passes_on_exact_optima() {
        let ens = LabeledEnsemble::uniform(vec![zero(), one()]).unwrap();
        let povm = PovmSet::try_new(vec![zero().into_matrix(), one().into_matrix()]).unwrap();
        let report = optimality_certificate(&ens, &povm, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");

        let trine = LabeledEnsemble::uniform(vec![zero(), one(), plus()]).unwrap();
        let optimal = PovmSet::try_new(vec![
            zero().into_matrix(),
            one().into_matrix(),
            ComplexMatrix::zeros(2, 2),
        ])
        .unwrap();
        let report = optimality_certificate(&trine, &optimal, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn certificate_fails_on_maximally_mixed_povm() {
        let ens = LabeledEnsemble::uniform(vec![zero(), plus()]).unwrap();
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        let povm = PovmSet::try_new(vec![half.clone(), half]).unwrap();
        let report = optimality_certificate(&ens, &povm, 1e-7).unwrap();
        assert!(!report.pass, "{report:?}");
        assert!(report.dual_min_eigenvalue < -1e-3);
    }

    #[test]
    fn brute_force_orthogonal_states() {
        let err = brute_force_two_state(&zero(), &one(), 0.5, 0.5, 2).unwrap();
        assert!(err.abs() < 1e-12);
    }

    #[test]
    fn brute_force_converges_to_helstrom() {
        let err = brute_force_two_state(&zero(), &plus(), 0.5, 0.5, 400).unwrap();
        let expect = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        assert!((err - expect).abs() < 1e-4);
        assert!(err >= expect - 1e-12);
    }

    #[test]
    fn ensemble_validation() {
        assert!(LabeledEnsemble::try_new(vec![zero()], vec![1.0]).is_err());
        assert!(LabeledEnsemble::try_new(vec![zero(), one()], vec![0.7, 0.7]).is_err());
        assert!(LabeledEnsemble::try_new(vec![zero(), one()], vec![1.3, -0.3]).is_err());
    }

    #[test]
    fn povm_rejects_incomplete_or_negative_sets() {
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(PovmSet::try_new(vec![half]).is_err());

        // Elements sum to I but one of them is negative.
        let neg = ComplexMatrix::identity(2).scale_re(-0.5);
        let compensating = ComplexMatrix::identity(2).scale_re(1.5);
        assert!(PovmSet::try_new(vec![neg, compensating]).is_err());
    }
}
