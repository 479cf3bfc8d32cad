use num_complex::Complex64;
use rustfft::FftPlanner;

use super::SubbandPartition;
use crate::error::{Error, Result};
use crate::sim::scene_bins;

/// Per-subband energies `||x_k||^2`, held in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandEnergies {
    energies: Vec<f64>,
    samples_per_subband: usize,
    sort_permutation: Vec<usize>,
}

impl SubbandEnergies {
    /// Sorts `raw` ascending and records where each entry came from.
    pub fn new(raw: Vec<f64>, samples_per_subband: usize) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::domain("need at least one subband energy"));
        }
        if samples_per_subband == 0 {
            return Err(Error::domain("samples per subband must be positive"));
        }
        if raw.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::domain("subband energies must be finite and nonnegative"));
        }
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
        let energies = order.iter().map(|&i| raw[i]).collect();
        Ok(Self { energies, samples_per_subband, sort_permutation: order })
    }

    /// Ascending energies.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `L`, the number of samples behind each energy.
    pub fn samples_per_subband(&self) -> usize {
        self.samples_per_subband
    }

    /// `sort_permutation()[i]` is the original index of the `i`-th smallest
    /// energy.
    pub fn sort_permutation(&self) -> &[usize] {
        &self.sort_permutation
    }

    pub fn k(&self) -> usize {
        self.energies.len()
    }

    /// Energies in the original subband order.
    pub fn original_order(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        for (e, &i) in self.energies.iter().zip(&self.sort_permutation) {
            out[i] = *e;
        }
        out
    }
}

/// Groups the unitary DFT of `signal` into subbands and sums `|X_j|^2`.
///
/// Without a partition the spectrum is cut into `k` contiguous blocks of
/// `L = len / k` bins. With a partition, each boundary pair selects the bins
/// whose frequency `j / len` falls inside it, `L` is the smallest group size
/// and larger groups keep only their first `L` bins; `k` must then equal
/// the number of segments.
pub fn subband_energies(
    signal: &[Complex64],
    k: usize,
    partition: Option<&SubbandPartition>,
) -> Result<SubbandEnergies> {
    let n = signal.len();
    if k == 0 || n == 0 {
        return Err(Error::domain("need a non-empty signal and at least one subband"));
    }
    let mut spectrum = signal.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let norm = 1.0 / n as f64;
    let bin_power: Vec<f64> = spectrum.iter().map(|z| z.norm_sqr() * norm).collect();

    match partition {
        None => {
            if !n.is_multiple_of(k) {
                return Err(Error::domain(format!(
                    "signal length {n} is not divisible by {k} subbands"
                )));
            }
            let l = n / k;
            let raw = bin_power.chunks_exact(l).map(|c| c.iter().sum()).collect();
            SubbandEnergies::new(raw, l)
        }
        Some(partition) => {
            if partition.segments() != k {
                return Err(Error::domain(format!(
                    "partition has {} segments but {k} subbands were requested",
                    partition.segments()
                )));
            }
            let groups: Vec<_> = partition
                .boundaries()
                .windows(2)
                .map(|w| scene_bins(w[0], w[1], n))
                .collect();
            if let Some(i) = groups.iter().position(|g| g.is_empty()) {
                return Err(Error::domain(format!("segment {i} contains no DFT bin")));
            }
            let l = groups.iter().map(|g| g.len()).min().unwrap_or(0);
            let raw = groups
                .into_iter()
                .map(|g| bin_power[g.start..g.start + l].iter().sum())
                .collect();
            SubbandEnergies::new(raw, l)
        }
    }
}
