//! Synthetic receiver data: cooperative narrowband frames, wideband
//! primary-user scenes and Welch PSD estimates.

mod frame;
mod psd;
mod scene;

pub use frame::{generate_narrowband_frame, ReceiverArray, SampleMatrix};
pub use psd::{estimate_psd, PsdEstimate};
pub use scene::{generate_wideband_signal, SpectrumScene, Subband};
pub(crate) use scene::bin_range as scene_bins;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Draws a circularly-symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
