use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Averaged periodogram over `[0, 1)` cycles/sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub segment_length: usize,
    pub overlap: f64,
}

impl PsdEstimate {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Frequency span covered by the grid.
    pub fn total_bandwidth(&self) -> f64 {
        1.0
    }

    pub fn bin_width(&self) -> f64 {
        self.total_bandwidth() / self.power.len() as f64
    }
}

/// Welch estimate with a periodic Hann window.
///
/// Each windowed periodogram is normalised by the window energy, so white
/// noise of variance `sigma2` has expected PSD `sigma2` in every bin.
pub fn estimate_psd(signal: &[Complex64], segment_length: usize, overlap: f64) -> Result<PsdEstimate> {
    if segment_length < 2 {
        return Err(Error::domain("segment length must be at least 2"));
    }
    if segment_length > signal.len() {
        return Err(Error::domain(format!(
            "segment length {segment_length} exceeds signal length {}",
            signal.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::domain(format!("overlap must lie in [0, 1), got {overlap}")));
    }
    let window: Vec<f64> = (0..segment_length)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / segment_length as f64).cos())
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let step = ((segment_length as f64 * (1.0 - overlap)).round() as usize).max(1);

    let fft = FftPlanner::new().plan_fft_forward(segment_length);
    let mut power = vec![0.0; segment_length];
    let mut buffer = vec![Complex64::new(0.0, 0.0); segment_length];
    let mut segments = 0usize;
    let mut start = 0;
    while start + segment_length <= signal.len() {
        for ((b, x), w) in buffer.iter_mut().zip(&signal[start..]).zip(&window) {
            *b = x * w;
        }
        fft.process(&mut buffer);
        for (p, b) in power.iter_mut().zip(&buffer) {
            *p += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let norm = 1.0 / (segments as f64 * window_energy);
    for p in &mut power {
        *p *= norm;
    }
    let freqs = (0..segment_length).map(|j| j as f64 / segment_length as f64).collect();
    Ok(PsdEstimate { freqs, power, segment_length, overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_wideband_signal, SpectrumScene};

    #[test]
    fn white_noise_is_flat_and_parseval_consistent() {
        let scene = SpectrumScene::equal_width(1, &[0], 0.0, 1.0).unwrap();
        let x = generate_wideband_signal(&scene, 1 << 16, 3).unwrap();
        let psd = estimate_psd(&x, 256, 0.5).unwrap();
        let max = psd.power.iter().cloned().fold(f64::MIN, f64::max);
        let min = psd.power.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 2.0, "max/min {}", max / min);
        let mean = psd.power.iter().sum::<f64>() / psd.len() as f64;
        let signal_power = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!((mean / signal_power - 1.0).abs() < 0.05);
        assert!(psd.freqs.windows(2).all(|w| (w[1] - w[0] - 1.0 / 256.0).abs() < 1e-15));
    }

    #[test]
    fn tone_peaks_at_its_bin() {
        let x: Vec<Complex64> = (0..4096)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * 32.0 * n as f64 / 256.0))
            .collect();
        let psd = estimate_psd(&x, 256, 0.5).unwrap();
        let peak = psd
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, 32);
    }

    #[test]
    fn zero_signal_zero_psd() {
        let psd = estimate_psd(&vec![Complex64::new(0.0, 0.0); 1024], 128, 0.25).unwrap();
        assert!(psd.power.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn argument_validation() {
        let x = vec![Complex64::new(1.0, 0.0); 64];
        assert!(estimate_psd(&x, 128, 0.5).is_err());
        assert!(estimate_psd(&x, 32, 1.0).is_err());
        assert!(estimate_psd(&x, 32, -0.1).is_err());
    }

    #[test]
    fn out_of_band_leakage_below_40_db() {
        let scene = SpectrumScene::equal_width(8, &[0, 1, 2, 4, 5, 6, 7], 1.0, 1e-30).unwrap();
        let x = generate_wideband_signal(&scene, 1 << 15, 8).unwrap();
        let psd = estimate_psd(&x, 256, 0.5).unwrap();
        let in_band = psd.power[100..124].iter().sum::<f64>() / 24.0;
        // four-bin guard on each side of the [96, 128) band for window leakage
        let far = psd
            .power
            .iter()
            .enumerate()
            .filter(|(j, _)| *j < 92 || *j >= 132)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
        assert!(far < 1e-4 * in_band, "far {far} in-band {in_band}");
    }
}
