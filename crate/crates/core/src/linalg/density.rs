use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{QemError, Result};
use crate::linalg::{eigenvalues_hermitian, trace_product, ComplexMatrix};

/// Hermiticity and trace tolerance for every density matrix.
pub const STATE_TOL: f64 = 1e-10;
/// Smallest eigenvalue tolerated before a state is declared non-positive.
pub const PSD_TOL: f64 = 1e-9;

/// A Hermitian matrix that is either a physical state (unit trace, positive
/// semidefinite) or an explicitly flagged signed effective state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    physical: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermiticity_deviation();
        if dev > STATE_TOL {
            return Err(QemError::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QemError::NotUnitTrace(tr.re));
        }
        if !matrix.is_positive_semidefinite(PSD_TOL) {
            return Err(QemError::NotPositive);
        }
        Ok(Self {
            matrix,
            physical: true,
        })
    }

    /// Signed effective state: only Hermiticity is enforced.
    pub fn non_physical(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermiticity_deviation();
        if dev > STATE_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(QemError::NotHermitian(dev));
        }
        Ok(Self {
            matrix,
            physical: false,
        })
    }

    /// Projector onto a (normalised internally) pure state.
    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(QemError::InvalidParameter("zero state vector".into()));
        }
        let v: Vec<Complex64> = state.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        Self {
            matrix: ComplexMatrix::basis_projector(dim, index),
            physical: true,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            physical: true,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(rho^2)`
    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix)
            .expect("same dimension")
            .re
    }

    /// `Tr(self * other)`, real part.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        Ok(trace_product(&self.matrix, &other.matrix)?.re)
    }

    pub fn expectation(&self, observable: &ComplexMatrix) -> Result<f64> {
        Ok(trace_product(observable, &self.matrix)?.re)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_hermitian(&self.matrix)
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Exact `rho^n`.
pub fn matrix_power(rho: &DensityMatrix, n: u32) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(QemError::InvalidParameter("matrix_power needs n >= 1".into()));
    }
    Ok(rho.matrix.pow(n))
}
