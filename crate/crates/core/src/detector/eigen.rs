//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a
//! diagonal unitary, then zeroes the now-real pivot with a plane rotation.
//! Eigenvectors are accumulated so that the residual `||R v - lambda v||`
//! can be reported against the original matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SampleCovariance;
use crate::error::{Error, Result};

/// Sweeps allowed before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 64;
const MAX_DIMENSION: usize = 10_000;

/// Eigenvalues sorted descending, plus the worst residual of the solve.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
    residual_bound: f64,
}

impl EigenSpectrum {
    /// Builds a spectrum from known values (sorted descending on the way in).
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("spectrum needs finite eigenvalues"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, residual_bound: 0.0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn off_diagonal_norm_sq(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum
}

pub fn hermitian_eigenvalues(r: &SampleCovariance) -> Result<EigenSpectrum> {
    let n = r.dim();
    if n > MAX_DIMENSION {
        return Err(Error::domain(format!("dimension {n} exceeds {MAX_DIMENSION}")));
    }
    let original = r.matrix();
    let mut a = original.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let target = (f64::EPSILON * f64::EPSILON) * scale;

    let mut converged = n == 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_JACOBI_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {MAX_JACOBI_SWEEPS} sweeps"
            )));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweep += 1;
        converged = off_diagonal_norm_sq(&a) <= target;
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut residual_bound: f64 = 0.0;
    for (j, &lambda) in values.iter().enumerate() {
        let col = v.column(j);
        let res = original * col - col * Complex64::new(lambda, 0.0);
        residual_bound = residual_bound.max(res.norm());
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("eigensolve produced non-finite values".into()));
    }
    let mut spectrum = EigenSpectrum::from_values(values)?;
    spectrum.residual_bound = residual_bound;
    Ok(spectrum)
}

/// One Jacobi rotation `A <- U^H A U`, `V <- V U` annihilating `a_pq`.
fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / r;

    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = D J with D = diag(.., conj(phase) at q, ..) and J the real rotation
    // [[c, s], [-s, c]] on (p, q).
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;

    let n = a.nrows();
    for i in 0..n {
        let (aip, aiq) = (a[(i, p)], a[(i, q)]);
        a[(i, p)] = aip * upp + aiq * uqp;
        a[(i, q)] = aip * upq + aiq * uqq;
    }
    for j in 0..n {
        let (apj, aqj) = (a[(p, j)], a[(q, j)]);
        a[(p, j)] = upp.conj() * apj + uqp.conj() * aqj;
        a[(q, j)] = upq.conj() * apj + uqq.conj() * aqj;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for i in 0..n {
        let (vip, viq) = (v[(i, p)], v[(i, q)]);
        v[(i, p)] = vip * upp + viq * uqp;
        v[(i, q)] = vip * upq + viq * uqq;
    }
}
