//! Subband segmentation for the unknown-count case.
//!
//! The log-PSD is smoothed with Gaussian kernels of standard deviation
//! `2^1 .. 2^n_scales` bins. The absolute first differences at every scale
//! are multiplied pointwise; true edges persist across scales while noise
//! does not, so the product peaks at band edges. Local maxima above
//! `mean + 2 std` of the product become boundaries, and boundaries closer
//! than twice the largest kernel width are merged in favour of the stronger.

use crate::error::{Error, Result};
use crate::sim::PsdEstimate;

/// Boundary threshold: mean plus this many standard deviations of the
/// edge product.
pub const EDGE_THRESHOLD_STDS: f64 = 2.0;
/// Gaussian kernels are truncated at this many standard deviations.
const KERNEL_RADIUS_STDS: f64 = 4.0;
const MIN_PSD_BINS: usize = 16;
const FLOOR_TOLERANCE: f64 = 1e-9;

/// Ordered band boundaries, first at 0 and last at the total bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandPartition {
    boundaries: Vec<f64>,
    total_bandwidth: f64,
    inferred_count: usize,
}

impl SubbandPartition {
    pub fn new(boundaries: Vec<f64>, total_bandwidth: f64) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::DegeneratePartition(format!(
                "{} boundaries cannot delimit a segment",
                boundaries.len()
            )));
        }
        if boundaries[0] != 0.0 || *boundaries.last().unwrap() != total_bandwidth {
            return Err(Error::DegeneratePartition(
                "partition must start at 0 and end at the total bandwidth".into(),
            ));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0] || w[1].is_nan()) {
            return Err(Error::DegeneratePartition("boundaries must be strictly increasing".into()));
        }
        let mut partition = Self { boundaries, total_bandwidth, inferred_count: 0 };
        partition.inferred_count = infer_subband_count(&partition, total_bandwidth);
        Ok(partition)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.total_bandwidth
    }

    /// Number of detected segments.
    pub fn segments(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn min_width(&self) -> f64 {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// `floor(total_bandwidth / min_width)`, at least 2.
    pub fn inferred_count(&self) -> usize {
        self.inferred_count
    }
}

/// Number of equal subbands implied by the narrowest segment.
pub fn infer_subband_count(partition: &SubbandPartition, total_bandwidth: f64) -> usize {
    let ratio = total_bandwidth / partition.min_width();
    ((ratio + FLOOR_TOLERANCE).floor() as usize).max(2)
}

fn gaussian_smooth(x: &[f64], sigma: f64) -> Vec<f64> {
    let radius = (KERNEL_RADIUS_STDS * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let last = x.len() as isize - 1;
    (0..x.len() as isize)
        .map(|i| {
            kernel
                .iter()
                .zip(-radius..=radius)
                .map(|(w, off)| w * x[(i + off).clamp(0, last) as usize])
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Multiscale edge product; entry `i` sits between bins `i` and `i + 1`.
pub(crate) fn edge_product(log_psd: &[f64], n_scales: u32) -> Vec<f64> {
    let mut product = vec![1.0; log_psd.len() - 1];
    for scale in 1..=n_scales {
        let smoothed = gaussian_smooth(log_psd, f64::from(1u32 << scale));
        for (p, w) in product.iter_mut().zip(smoothed.windows(2)) {
            *p *= (w[1] - w[0]).abs();
        }
    }
    product
}

/// Segments the PSD into subbands at persistent edges of its log.
pub fn detect_boundaries(psd: &PsdEstimate, n_scales: u32) -> Result<SubbandPartition> {
    let len = psd.len();
    if len < MIN_PSD_BINS {
        return Err(Error::domain(format!("PSD needs at least {MIN_PSD_BINS} bins, got {len}")));
    }
    if n_scales == 0 || n_scales > 16 {
        return Err(Error::domain(format!("n_scales must lie in 1..=16, got {n_scales}")));
    }
    if psd.power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::domain("PSD values must be finite and nonnegative"));
    }
    let peak = psd.power.iter().cloned().fold(0.0, f64::max);
    let floor = (peak * 1e-15).max(f64::MIN_POSITIVE);
    let log_psd: Vec<f64> = psd.power.iter().map(|p| p.max(floor).ln()).collect();

    let product = edge_product(&log_psd, n_scales);
    let count = product.len() as f64;
    let mean = product.iter().sum::<f64>() / count;
    let std = (product.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / count).sqrt();
    let threshold = mean + EDGE_THRESHOLD_STDS * std;

    let mut candidates: Vec<(usize, f64)> = (0..product.len())
        .filter(|&i| {
            let p = product[i];
            let left = if i > 0 { product[i - 1] } else { f64::NEG_INFINITY };
            let right = product.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            p > 0.0 && p > threshold && p > left && p >= right
        })
        .map(|i| (i + 1, product[i]))
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let merge_distance = 2 * (1usize << n_scales);
    let mut accepted: Vec<usize> = Vec::new();
    for (bin, _) in candidates {
        let clear_of_edges = bin >= merge_distance && len - bin >= merge_distance;
        if clear_of_edges && accepted.iter().all(|&b| b.abs_diff(bin) >= merge_distance) {
            accepted.push(bin);
        }
    }
    accepted.sort_unstable();

    let bin_width = psd.bin_width();
    let bandwidth = psd.total_bandwidth();
    let mut boundaries = Vec::with_capacity(accepted.len() + 2);
    boundaries.push(0.0);
    boundaries.extend(accepted.into_iter().map(|b| b as f64 * bin_width));
    boundaries.push(bandwidth);
    SubbandPartition::new(boundaries, bandwidth)
}
