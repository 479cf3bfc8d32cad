use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::SampleMatrix;

/// `R = Y Y^H`, symmetrised to be exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    matrix: DMatrix<Complex64>,
}

impl SampleCovariance {
    /// Wraps an arbitrary square matrix, replacing it by `(R + R^H) / 2`.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::domain("covariance must be a non-empty square matrix"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("covariance has non-finite entries"));
        }
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { matrix: sym })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

pub fn sample_covariance(y: &SampleMatrix) -> Result<SampleCovariance> {
    let entries = y.entries();
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("sample matrix has non-finite entries"));
    }
    SampleCovariance::from_matrix(entries * entries.adjoint())
}
