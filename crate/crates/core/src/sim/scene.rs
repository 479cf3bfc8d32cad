use std::ops::Range;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::complex_gaussian;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

const EDGE_TOLERANCE: f64 = 1e-9;

/// One contiguous slice of the monitored band. `power` is the in-band PSD
/// level of the primary signal (same units as the noise PSD level
/// `noise_sigma2`), zero when unoccupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subband {
    pub start: f64,
    pub end: f64,
    pub occupied: bool,
    pub power: f64,
}

impl Subband {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    total_bandwidth: f64,
    subbands: Vec<Subband>,
    noise_sigma2: f64,
}

/// A wideband primary-user layout over `[0, total_bandwidth]` cycles/sample.
///
/// JSON form:
///
/// ```json
/// {"total_bandwidth": 1.0,
///  "subbands": [{"start": 0.0, "end": 0.5, "occupied": true, "power": 3.0},
///               {"start": 0.5, "end": 1.0, "occupied": false, "power": 0.0}],
///  "noise_sigma2": 1.0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneFile")]
pub struct SpectrumScene {
    total_bandwidth: f64,
    subbands: Vec<Subband>,
    noise_sigma2: f64,
}

impl TryFrom<SceneFile> for SpectrumScene {
    type Error = Error;

    fn try_from(file: SceneFile) -> Result<Self> {
        SpectrumScene::new(file.total_bandwidth, file.subbands, file.noise_sigma2)
    }
}

impl SpectrumScene {
    pub fn new(total_bandwidth: f64, subbands: Vec<Subband>, noise_sigma2: f64) -> Result<Self> {
        if !(total_bandwidth > 0.0 && total_bandwidth <= 1.0) {
            return Err(Error::domain(format!(
                "total bandwidth must lie in (0, 1], got {total_bandwidth}"
            )));
        }
        if noise_sigma2 <= 0.0 || !noise_sigma2.is_finite() {
            return Err(Error::domain(format!("noise variance must be positive, got {noise_sigma2}")));
        }
        if subbands.is_empty() {
            return Err(Error::domain("scene needs at least one subband"));
        }
        let mut edge = 0.0;
        for (i, band) in subbands.iter().enumerate() {
            if (band.start - edge).abs() > EDGE_TOLERANCE {
                return Err(Error::domain(format!(
                    "subband {i} starts at {} but previous edge is {edge}",
                    band.start
                )));
            }
            if band.width() <= 0.0 || band.width().is_nan() {
                return Err(Error::domain(format!("subband {i} has zero width")));
            }
            if band.occupied && !(band.power > 0.0 && band.power.is_finite()) {
                return Err(Error::domain(format!("occupied subband {i} needs positive power")));
            }
            if !band.occupied && band.power != 0.0 {
                return Err(Error::domain(format!("unoccupied subband {i} must have zero power")));
            }
            edge = band.end;
        }
        if (edge - total_bandwidth).abs() > EDGE_TOLERANCE {
            return Err(Error::domain(format!(
                "subbands end at {edge}, expected total bandwidth {total_bandwidth}"
            )));
        }
        if subbands.iter().all(|b| b.occupied) {
            return Err(Error::domain("scene needs at least one unoccupied subband"));
        }
        Ok(Self { total_bandwidth, subbands, noise_sigma2 })
    }

    /// `k` equal subbands over the full band; every index not listed in
    /// `unused` carries a primary at PSD level `occupied_power`.
    pub fn equal_width(k: usize, unused: &[usize], occupied_power: f64, noise_sigma2: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("scene needs at least one subband"));
        }
        let subbands = (0..k)
            .map(|i| {
                let occupied = !unused.contains(&i);
                Subband {
                    start: i as f64 / k as f64,
                    end: (i + 1) as f64 / k as f64,
                    occupied,
                    power: if occupied { occupied_power } else { 0.0 },
                }
            })
            .collect();
        Self::new(1.0, subbands, noise_sigma2)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.total_bandwidth
    }

    pub fn subbands(&self) -> &[Subband] {
        &self.subbands
    }

    pub fn noise_sigma2(&self) -> f64 {
        self.noise_sigma2
    }

    /// Same layout with every power (noise and primary) multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let subbands = self
            .subbands
            .iter()
            .map(|b| Subband { power: b.power * c, ..*b })
            .collect();
        Self::new(self.total_bandwidth, subbands, self.noise_sigma2 * c)
    }
}

/// DFT bins `j` of an `n`-point transform with `start <= j/n < end`.
pub(crate) fn bin_range(start: f64, end: f64, n: usize) -> Range<usize> {
    let lo = (start * n as f64 - EDGE_TOLERANCE).ceil().max(0.0) as usize;
    let hi = (end * n as f64 - EDGE_TOLERANCE).ceil().max(0.0) as usize;
    lo.min(n)..hi.min(n)
}

/// White complex Gaussian noise plus, for every occupied subband, a
/// band-limited Gaussian process synthesised by masking a white spectrum.
///
/// Each in-band DFT coefficient is `CN(0, power)` under the unitary DFT, so
/// the primary's PSD level inside the band is `power` and its time-domain
/// variance is `power * width`.
pub fn generate_wideband_signal(scene: &SpectrumScene, n_total: usize, seed: u64) -> Result<Vec<Complex64>> {
    let k = scene.subbands().len();
    if n_total < 4 * k {
        return Err(Error::domain(format!(
            "need at least {} samples for {k} subbands, got {n_total}",
            4 * k
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut signal: Vec<Complex64> = (0..n_total)
        .map(|_| complex_gaussian(&mut rng, scene.noise_sigma2()))
        .collect();

    let occupied: Vec<&Subband> = scene.subbands().iter().filter(|b| b.occupied).collect();
    if occupied.is_empty() {
        return Ok(signal);
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n_total];
    for band in occupied {
        let bins = bin_range(band.start, band.end, n_total);
        if bins.is_empty() {
            return Err(Error::domain(format!(
                "subband [{}, {}) covers no DFT bin at {n_total} samples",
                band.start, band.end
            )));
        }
        for coeff in &mut spectrum[bins] {
            *coeff = complex_gaussian(&mut rng, band.power);
        }
    }
    FftPlanner::new().plan_fft_inverse(n_total).process(&mut spectrum);
    let norm = 1.0 / (n_total as f64).sqrt();
    for (x, p) in signal.iter_mut().zip(&spectrum) {
        *x += p * norm;
    }
    Ok(signal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(x: &[Complex64]) -> f64 {
        x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64
    }

    #[test]
    fn rejects_malformed_scenes() {
        let gap = vec![
            Subband { start: 0.0, end: 0.4, occupied: false, power: 0.0 },
            Subband { start: 0.5, end: 1.0, occupied: true, power: 1.0 },
        ];
        assert!(SpectrumScene::new(1.0, gap, 1.0).is_err());
        let zero_width = vec![
            Subband { start: 0.0, end: 0.0, occupied: false, power: 0.0 },
            Subband { start: 0.0, end: 1.0, occupied: false, power: 0.0 },
        ];
        assert!(SpectrumScene::new(1.0, zero_width, 1.0).is_err());
        assert!(SpectrumScene::equal_width(4, &[], 1.0, 1.0).is_err());
        let powered_hole = vec![Subband { start: 0.0, end: 1.0, occupied: false, power: 2.0 }];
        assert!(SpectrumScene::new(1.0, powered_hole, 1.0).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let text = r#"{"total_bandwidth": 1.0,
            "subbands": [{"start": 0.0, "end": 0.5, "occupied": true, "power": 3.0},
                         {"start": 0.5, "end": 1.0, "occupied": false, "power": 0.0}],
            "noise_sigma2": 2.0}"#;
        let scene = SpectrumScene::from_json(text).unwrap();
        assert_eq!(scene.subbands().len(), 2);
        let back = SpectrumScene::from_json(&serde_json::to_string(&scene).unwrap()).unwrap();
        assert_eq!(scene, back);

        let extra = r#"{"total_bandwidth": 1.0, "subbands": [], "noise_sigma2": 1.0, "x": 1}"#;
        assert!(SpectrumScene::from_json(extra).is_err());
    }

    #[test]
    fn pure_noise_variance() {
        let scene = SpectrumScene::equal_width(4, &[0, 1, 2, 3], 0.0, 1.5).unwrap();
        let x = generate_wideband_signal(&scene, 1 << 16, 11).unwrap();
        assert!((variance(&x) / 1.5 - 1.0).abs() < 0.03);
    }

    #[test]
    fn narrow_primary_adds_power_times_width() {
        // Parseval oracle: the unitary DFT of the output has total energy
        // n_total * variance; expected variance is sigma2 + p / 8.
        let p = 8.0;
        let scene = SpectrumScene::equal_width(8, &[0, 1, 2, 4, 5, 6, 7], p, 1.0).unwrap();
        let trials = 20;
        let mean = (0..trials)
            .map(|s| variance(&generate_wideband_signal(&scene, 1 << 14, s).unwrap()))
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 2.0).abs() < 0.02 * 2.0, "mean power {mean}");
    }

    #[test]
    fn masking_leaves_no_out_of_band_energy() {
        let scene = SpectrumScene::equal_width(8, &[0, 1, 2, 4, 5, 6, 7], 1.0, 1e-30).unwrap();
        let n = 4096;
        let mut x = generate_wideband_signal(&scene, n, 5).unwrap();
        FftPlanner::new().plan_fft_forward(n).process(&mut x);
        let band = bin_range(3.0 / 8.0, 4.0 / 8.0, n);
        let in_band: f64 = x[band.clone()].iter().map(|z| z.norm_sqr()).sum::<f64>() / band.len() as f64;
        let out_max = x
            .iter()
            .enumerate()
            .filter(|(j, _)| !band.contains(j))
            .map(|(_, z)| z.norm_sqr())
            .fold(0.0, f64::max);
        assert!(out_max < 1e-4 * in_band, "leak {out_max} vs {in_band}");
    }

    #[test]
    fn too_few_samples_rejected() {
        let scene = SpectrumScene::equal_width(8, &[0], 1.0, 1.0).unwrap();
        assert!(generate_wideband_signal(&scene, 31, 0).is_err());
    }

    #[test]
    fn bin_ranges_tile() {
        assert_eq!(bin_range(0.0, 0.25, 16), 0..4);
        assert_eq!(bin_range(0.25, 1.0, 16), 4..16);
        assert_eq!(bin_range(0.1, 0.2, 10), 1..2);
    }
}
