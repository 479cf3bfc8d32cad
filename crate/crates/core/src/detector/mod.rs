//! Eigenvalue-based detection over the cooperative sample matrix.

mod covariance;
mod eigen;
mod statistic;

pub use covariance::{sample_covariance, SampleCovariance};
pub use eigen::{hermitian_eigenvalues, EigenSpectrum, MAX_JACOBI_SWEEPS};
pub use statistic::{
    agm_statistic, decide, energy_statistic, mp_edge_statistic, DetectorKind, DetectorStatistic,
    Hypothesis,
};
