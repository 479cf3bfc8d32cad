//! End-to-end noise estimation pipelines for the three knowledge levels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    detect_boundaries, estimate_m, estimate_m_uniform, noise_variance, subband_energies,
    NoiseEstimate, PriorSpec, Scenario, SubbandPartition,
};
use crate::error::Result;
use crate::sim::estimate_psd;

/// PSD and edge-detector settings for the unknown-count pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationParams {
    pub segment_length: usize,
    pub overlap: f64,
    pub n_scales: u32,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self { segment_length: 1024, overlap: 0.5, n_scales: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedEstimate {
    pub estimate: NoiseEstimate,
    pub partition: SubbandPartition,
    /// Equal-width subband count actually used for the energies.
    pub subband_count: usize,
}

/// Known subband count and usage prior.
pub fn estimate_noise_known_prior(signal: &[Complex64], k: usize, prior: &PriorSpec) -> Result<NoiseEstimate> {
    let energies = subband_energies(signal, k, None)?;
    let m_hat = estimate_m(&energies, &prior.resolve(k)?)?;
    noise_variance(&energies, m_hat, Scenario::KnownPrior)
}

/// Known subband count, no usage information.
pub fn estimate_noise_known_count(signal: &[Complex64], k: usize) -> Result<NoiseEstimate> {
    let energies = subband_energies(signal, k, None)?;
    let m_hat = estimate_m_uniform(&energies)?;
    noise_variance(&energies, m_hat, Scenario::KnownCount)
}

/// Unknown subband count: PSD, edge segmentation, count inference, then
/// the GLRT over equal-width subbands of the inferred width.
pub fn estimate_noise_scenario3(
    signal: &[Complex64],
    params: &SegmentationParams,
    prior: Option<&PriorSpec>,
) -> Result<NoiseEstimate> {
    segment_and_estimate(signal, params, prior).map(|s| s.estimate)
}

/// [`estimate_noise_scenario3`] together with its intermediate products.
///
/// Equal-width energies need the signal length to be a multiple of the
/// subband count, so the inferred count is lowered to the largest divisor
/// of the signal length that does not exceed it.
pub fn segment_and_estimate(
    signal: &[Complex64],
    params: &SegmentationParams,
    prior: Option<&PriorSpec>,
) -> Result<SegmentedEstimate> {
    let psd = estimate_psd(signal, params.segment_length, params.overlap)?;
    let partition = detect_boundaries(&psd, params.n_scales)?;
    let k = largest_divisor_at_most(signal.len(), partition.inferred_count()).max(1);
    let energies = subband_energies(signal, k, None)?;
    let m_hat = match prior {
        Some(spec) => estimate_m(&energies, &spec.resolve(k)?)?,
        None => estimate_m_uniform(&energies)?,
    };
    let estimate = noise_variance(&energies, m_hat, Scenario::UnknownCount)?;
    Ok(SegmentedEstimate { estimate, partition, subband_count: k })
}

fn largest_divisor_at_most(n: usize, cap: usize) -> usize {
    (1..=cap.min(n)).rev().find(|&d| n.is_multiple_of(d)).unwrap_or(1)
}
