use nalgebra::DMatrix;
use num_complex::Complex64;

use super::complex_gaussian;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Channel gains `h_i` of the `K` cooperating receivers and their common
/// noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverArray {
    gains: Vec<Complex64>,
    sigma2: f64,
}

impl ReceiverArray {
    pub fn new(gains: Vec<Complex64>, sigma2: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::domain("receiver array needs at least one receiver"));
        }
        if sigma2 <= 0.0 || !sigma2.is_finite() {
            return Err(Error::domain(format!("noise variance must be positive, got {sigma2}")));
        }
        if gains.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::domain("channel gains must be finite"));
        }
        Ok(Self { gains, sigma2 })
    }

    /// Draws i.i.d. `CN(0, 1)` gains and rescales them so that the array
    /// hits `snr_db` exactly.
    pub fn with_target_snr(k: usize, snr_db: f64, sigma2: f64, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("receiver array needs at least one receiver"));
        }
        if !snr_db.is_finite() {
            return Err(Error::domain("SNR must be finite"));
        }
        let mut rng = rng_from_seed(seed);
        let mut gains: Vec<Complex64> = (0..k).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let mean_power = gains.iter().map(|h| h.norm_sqr()).sum::<f64>() / k as f64;
        let target = super::db_to_linear(snr_db) * sigma2;
        let scale = (target / mean_power).sqrt();
        for h in &mut gains {
            *h *= scale;
        }
        Self::new(gains, sigma2)
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn k(&self) -> usize {
        self.gains.len()
    }

    /// `(sum |h_i|^2 / K) / sigma2`.
    pub fn snr(&self) -> f64 {
        self.gains.iter().map(|h| h.norm_sqr()).sum::<f64>() / self.k() as f64 / self.sigma2
    }
}

/// `K x N` cooperative snapshot, already scaled by `1/sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    entries: DMatrix<Complex64>,
}

impl SampleMatrix {
    /// Wraps an already-scaled matrix.
    pub fn from_scaled(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::domain("sample matrix must be at least 1x1"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("sample matrix has non-finite entries"));
        }
        Ok(Self { entries })
    }

    /// Builds `Y = raw / sqrt(N)` from unscaled receiver samples
    /// (one row per receiver).
    pub fn from_raw(raw: DMatrix<Complex64>) -> Result<Self> {
        let n = raw.ncols();
        if n == 0 {
            return Err(Error::domain("sample matrix must be at least 1x1"));
        }
        Self::from_scaled(raw / Complex64::new((n as f64).sqrt(), 0.0))
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn k_receivers(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.entries.ncols()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { entries: &self.entries * Complex64::new(c, 0.0) }
    }
}

/// One frame of `n_samples` per receiver: `y_i(n) = h_i s(n) + z_i(n)` when
/// occupied, `z_i(n)` otherwise, with `s` unit-variance complex Gaussian.
pub fn generate_narrowband_frame(
    array: &ReceiverArray,
    n_samples: usize,
    occupied: bool,
    seed: u64,
) -> Result<SampleMatrix> {
    if n_samples == 0 {
        return Err(Error::domain("a frame needs at least one sample"));
    }
    let k = array.k();
    let mut rng = rng_from_seed(seed);
    let mut raw = DMatrix::<Complex64>::zeros(k, n_samples);
    // Column-major fill: per time index, the primary symbol then the K noise
    // samples, so the draw order does not depend on the storage layout.
    for n in 0..n_samples {
        let symbol = if occupied { complex_gaussian(&mut rng, 1.0) } else { Complex64::new(0.0, 0.0) };
        for i in 0..k {
            let noise = complex_gaussian(&mut rng, array.sigma2());
            raw[(i, n)] = array.gains()[i] * symbol + noise;
        }
    }
    SampleMatrix::from_raw(raw)
}
