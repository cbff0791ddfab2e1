//! Dense complex operators: Hermitian matrices, density matrices, eigendecomposition
//! and the column-stacking vectorization used for superoperators.
//!
//! Units follow the crate convention `hbar = k_B = 1`; energies and temperatures
//! are expressed in a reference gap chosen by the caller.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Entrywise tolerance for `M = M^dagger`, scaled by `max(1, max |M_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Largest imaginary part tolerated in the expectation value of a Hermitian operator.
pub const IMAG_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_square_finite(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::invalid("matrix", "dimension must be positive"));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    Ok(())
}

/// Largest entrywise deviation `|M_ij - conj(M_ji)|`.
pub fn max_asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn entry_scale(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

/// A finite square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square_finite(&matrix)?;
        let asym = max_asymmetry(&matrix);
        let tol = HERMITIAN_TOL * entry_scale(&matrix);
        if asym > tol {
            return Err(Error::Invariant {
                what: "operator is not Hermitian (max |M_ij - conj(M_ji)|)",
                measured: asym,
                tolerance: tol,
            });
        }
        Ok(Self(matrix))
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(c))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(values.len(), values.iter().copied().map(c));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// Largest absolute eigenvalue, which is the spectral norm for a Hermitian matrix.
    pub fn spectral_norm(&self) -> f64 {
        let eig = SymmetricEigen::new(self.0.clone());
        eig.eigenvalues.iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }
}

/// Eigenvalues sorted ascending with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(E) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*e);
        }
        scaled * v.adjoint()
    }

    /// Applies `f` to the spectrum and rebuilds the operator.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(*e));
        }
        scaled * v.adjoint()
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Ties keep the order produced by the underlying solver, which is a stable
/// function of the input; a stable sort is used so repeated calls agree.
pub fn eigh(h: &HermitianOperator) -> EigenDecomposition {
    let eig = SymmetricEigen::new(h.matrix().clone());
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// A unit-trace, positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, TRACE_TOL, POSITIVITY_TOL)
    }

    /// Validates with caller-supplied trace and positivity slack.
    pub fn with_tolerance(
        matrix: ComplexMatrix,
        trace_tol: f64,
        positivity_tol: f64,
    ) -> Result<Self> {
        let h = HermitianOperator::new(matrix)?;
        let tr = h.matrix().trace();
        let drift = (tr - c(1.0)).norm();
        if drift > trace_tol {
            return Err(Error::Invariant {
                what: "density matrix trace differs from 1",
                measured: drift,
                tolerance: trace_tol,
            });
        }
        let min_eig = eigh(&h).eigenvalues[0];
        if min_eig < -positivity_tol {
            return Err(Error::Invariant {
                what: "density matrix has a negative eigenvalue",
                measured: min_eig,
                tolerance: positivity_tol,
            });
        }
        Ok(Self(h.into_matrix()))
    }

    /// `|index><index|`.
    pub fn pure(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = c(1.0);
        Ok(Self(m))
    }

    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        if populations.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(
                "populations",
                "each population must lie in [0, 1]",
            ));
        }
        let d = DVector::from_iterator(populations.len(), populations.iter().copied().map(c));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim).map(|z| z / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `<i|rho|i>` in the computational basis.
    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&HermitianOperator(self.0.clone())).eigenvalues[0]
    }

    /// `1/2 ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = HermitianOperator(&self.0 - &other.0);
        Ok(0.5 * eigh(&diff).eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
    }
}

/// `Tr[A rho]`, checked to be real.
pub fn expectation(a: &HermitianOperator, rho: &DensityMatrix) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: rho.dim(),
        });
    }
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a.matrix()[(i, k)] * rho.matrix()[(k, i)];
        }
    }
    let tol = IMAG_TOL * entry_scale(a.matrix());
    if acc.im.abs() > tol {
        return Err(Error::NumericalConsistency(format!(
            "expectation value has imaginary part {:.3e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Column-stacking vectorization: `[[a, b], [c, d]] -> (a, c, b, d)`.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &ComplexVector) -> Result<ComplexMatrix> {
    let len = v.len();
    let dim = (len as f64).sqrt().round() as usize;
    if dim * dim != len {
        return Err(Error::invalid(
            "vector",
            format!("length {len} is not a perfect square"),
        ));
    }
    Ok(ComplexMatrix::from_column_slice(dim, dim, v.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cm(rows: usize, data: &[(f64, f64)]) -> ComplexMatrix {
        ComplexMatrix::from_row_iterator(
            rows,
            rows,
            data.iter().map(|&(re, im)| Complex64::new(re, im)),
        )
    }

    #[test]
    fn eigh_identity() {
        let eig = eigh(&HermitianOperator::identity(2));
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        let gram = eig.eigenvectors.adjoint() * &eig.eigenvectors;
        assert!((gram - ComplexMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn eigh_diagonal_gives_canonical_basis() {
        let h = 0.7;
        let eig = eigh(&HermitianOperator::diagonal(&[0.0, h]).unwrap());
        assert_eq!(eig.eigenvalues, vec![0.0, h]);
        assert_relative_eq!(eig.eigenvectors[(0, 0)].norm(), 1.0);
        assert_relative_eq!(eig.eigenvectors[(1, 1)].norm(), 1.0);
        assert_eq!(eig.eigenvectors[(1, 0)].norm(), 0.0);
    }

    #[test]
    fn eigh_two_level_tunneling() {
        let (h, g) = (1.0, 0.3);
        let op = HermitianOperator::new(cm(2, &[(h, 0.0), (g, 0.0), (g, 0.0), (h, 0.0)])).unwrap();
        let eig = eigh(&op);
        assert_relative_eq!(eig.eigenvalues[0], h - g, epsilon = 1e-14);
        assert_relative_eq!(eig.eigenvalues[1], h + g, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (1, -1)/sqrt(2) for h - g, (1, 1)/sqrt(2) for h + g, up to a global phase
        let lower = eig.eigenvectors.column(0);
        let upper = eig.eigenvectors.column(1);
        assert_relative_eq!((lower[0] - (-lower[1])).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(lower[0].norm(), s, epsilon = 1e-14);
        assert_relative_eq!((upper[0] - upper[1]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianOperator::new(cm(2, &[(0.0, 0.0), (1.0, 0.0), (0.5, 0.0), (0.0, 0.0)]))
            .unwrap_err();
        match err {
            Error::Invariant { measured, .. } => assert_relative_eq!(measured, 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(HermitianOperator::new(ComplexMatrix::zeros(2, 3)).is_err());
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = c(f64::NAN);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn expectation_examples() {
        let rho = DensityMatrix::from_populations(&[0.3, 0.7]).unwrap();
        assert_relative_eq!(
            expectation(&HermitianOperator::identity(2), &rho).unwrap(),
            1.0
        );

        let d = 2.0;
        let x = HermitianOperator::diagonal(&[-d / 2.0, d / 2.0]).unwrap();
        assert_relative_eq!(
            expectation(&x, &rho).unwrap(),
            d / 2.0 * (0.7 - 0.3),
            epsilon = 1e-15
        );

        let flip =
            HermitianOperator::from_real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
                .unwrap();
        let ground = DensityMatrix::pure(2, 0).unwrap();
        assert_eq!(expectation(&flip, &ground).unwrap(), 0.0);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            expectation(&HermitianOperator::identity(2), &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vectorize_convention() {
        let m = cm(2, &[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let v = vectorize(&m);
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 3.0, 2.0, 4.0]);
        let id = vectorize(&ComplexMatrix::identity(2, 2));
        let re: Vec<f64> = id.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn devectorize_rejects_non_square_length() {
        assert!(devectorize(&ComplexVector::zeros(5)).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_populations(&[0.5, 0.6]).is_err());
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.2);
        m[(1, 1)] = c(-0.2);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::pure(2, 2).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_one() {
        let a = DensityMatrix::pure(3, 0).unwrap();
        let b = DensityMatrix::pure(3, 2).unwrap();
        assert_relative_eq!(a.trace_distance(&b).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(a.trace_distance(&a).unwrap(), 0.0);
    }
}
