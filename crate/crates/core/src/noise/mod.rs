//! Noise-variance estimation over the subbands of a wideband observation.
//!
//! Three levels of prior knowledge are supported:
//!
//! * known subband count and a usage prior `P(M)` ([`estimate_m`]),
//! * known subband count only ([`estimate_m_uniform`], or the
//!   [`min_energy_noise`] shortcut),
//! * unknown subband count, inferred from edges in the PSD
//!   ([`estimate_noise_scenario3`]).

mod energies;
mod glrt;
mod prior;
mod scenario;
mod segmentation;

pub use energies::{subband_energies, SubbandEnergies};
pub use glrt::{
    estimate_m, estimate_m_uniform, glrt_objective, min_energy_noise, noise_variance, NoiseEstimate,
    Scenario,
};
pub use prior::{PriorKind, PriorSpec, UsagePrior};
pub use scenario::{
    estimate_noise_known_count, estimate_noise_known_prior, estimate_noise_scenario3,
    segment_and_estimate, SegmentationParams, SegmentedEstimate,
};
pub use segmentation::{detect_boundaries, infer_subband_count, SubbandPartition};
