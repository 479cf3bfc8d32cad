use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EigenSpectrum;
use crate::error::{Error, Result};
use crate::rmt::mp_support;
use crate::sim::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    /// Largest eigenvalue over the Marchenko–Pastur upper edge.
    MpEdge,
    /// Mean received power over the noise estimate.
    Energy,
    /// Arithmetic over geometric mean of the eigenvalues.
    Agm,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::MpEdge, DetectorKind::Energy, DetectorKind::Agm];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::MpEdge => "mp_edge",
            DetectorKind::Energy => "energy",
            DetectorKind::Agm => "agm",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown detector {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Noise only.
    H0,
    /// Primary present.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorStatistic {
    pub value: f64,
    pub kind: DetectorKind,
    pub threshold: f64,
    pub decision: Hypothesis,
}

impl DetectorStatistic {
    pub fn new(kind: DetectorKind, value: f64, threshold: f64) -> Self {
        Self { value, kind, threshold, decision: decide(value, threshold) }
    }
}

fn check_sigma2(sigma2_hat: f64) -> Result<()> {
    if sigma2_hat <= 0.0 || !sigma2_hat.is_finite() {
        return Err(Error::domain(format!("noise estimate must be positive, got {sigma2_hat}")));
    }
    Ok(())
}

/// `lambda_max / b`, with `b = sigma2_hat (1 + sqrt(K/N))^2` the upper
/// edge of the noise-only eigenvalue support.
pub fn mp_edge_statistic(spectrum: &EigenSpectrum, sigma2_hat: f64, k: usize, n: usize) -> Result<f64> {
    check_sigma2(sigma2_hat)?;
    if k == 0 || n == 0 {
        return Err(Error::domain("K and N must be positive"));
    }
    let (_, edge) = mp_support(sigma2_hat, k as f64 / n as f64)?;
    Ok(spectrum.largest() / edge)
}

/// `trace(Y Y^H) / (K sigma2_hat)`.
pub fn energy_statistic(y: &SampleMatrix, sigma2_hat: f64) -> Result<f64> {
    check_sigma2(sigma2_hat)?;
    Ok(y.frobenius_sq() / (y.k_receivers() as f64 * sigma2_hat))
}

/// Arithmetic mean over geometric mean of the eigenvalues; `>= 1`.
pub fn agm_statistic(spectrum: &EigenSpectrum) -> Result<f64> {
    let values = spectrum.values();
    if values.iter().any(|&x| x <= 0.0 || x.is_nan()) {
        return Err(Error::domain("AM/GM statistic needs strictly positive eigenvalues"));
    }
    let k = values.len() as f64;
    let log_am = (values.iter().sum::<f64>() / k).ln();
    let log_gm = values.iter().map(|x| x.ln()).sum::<f64>() / k;
    Ok((log_am - log_gm).exp())
}

/// H1 iff `value > threshold`.
pub fn decide(value: f64, threshold: f64) -> Hypothesis {
    if value > threshold { Hypothesis::H1 } else { Hypothesis::H0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn mp_edge_of_zero_spectrum() {
        let spec = EigenSpectrum::from_values(vec![0.0; 7]).unwrap();
        assert_eq!(mp_edge_statistic(&spec, 1.0, 7, 100).unwrap(), 0.0);
        assert!(mp_edge_statistic(&spec, 0.0, 7, 100).is_err());
    }

    #[test]
    fn energy_of_zero_matrix() {
        let y = SampleMatrix::from_scaled(DMatrix::zeros(3, 5)).unwrap();
        assert_eq!(energy_statistic(&y, 1.0).unwrap(), 0.0);
        assert!(energy_statistic(&y, -1.0).is_err());
    }

    #[test]
    fn agm_examples() {
        let flat = EigenSpectrum::from_values(vec![2.0; 5]).unwrap();
        assert!((agm_statistic(&flat).unwrap() - 1.0).abs() < 1e-12);
        let pair = EigenSpectrum::from_values(vec![4.0, 1.0]).unwrap();
        assert!((agm_statistic(&pair).unwrap() - 1.25).abs() < 1e-12);
        let singular = EigenSpectrum::from_values(vec![1.0, 0.0]).unwrap();
        assert!(agm_statistic(&singular).is_err());
    }

    #[test]
    fn decision_is_strict() {
        assert_eq!(decide(0.5, 1.0), Hypothesis::H0);
        assert_eq!(decide(1.5, 1.0), Hypothesis::H1);
        assert_eq!(decide(1.0, 1.0), Hypothesis::H0);
        assert_eq!(DetectorStatistic::new(DetectorKind::Agm, 2.0, 1.0).decision, Hypothesis::H1);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in DetectorKind::ALL {
            assert_eq!(kind.name().parse::<DetectorKind>().unwrap(), kind);
        }
        assert!("glrt".parse::<DetectorKind>().is_err());
    }
}
