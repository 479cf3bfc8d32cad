//! Monte Carlo threshold calibration.
//!
//! Noise-only frames are simulated with per-trial seeds, the chosen
//! statistic is computed on each, and the sorted sample serves as the
//! empirical H0 distribution. Thresholds are read off as interpolated
//! empirical quantiles.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    agm_statistic, energy_statistic, hermitian_eigenvalues, mp_edge_statistic, sample_covariance,
    DetectorKind,
};
use crate::error::{Error, Result};
use crate::noise::estimate_noise_known_count;
use crate::seed::{derive_seed, Stream};
use crate::sim::{
    generate_narrowband_frame, generate_wideband_signal, ReceiverArray, SampleMatrix, SpectrumScene,
};

pub const MIN_CALIBRATION_TRIALS: usize = 100;

/// How the detectors obtain the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma2Mode {
    /// The true simulation variance.
    Oracle,
    /// Estimated per trial from a companion wideband noise record.
    Estimated,
}

/// Companion record used in [`Sigma2Mode::Estimated`]: white noise of
/// `samples` length, estimated with the known-count GLRT over `subbands`
/// equal subbands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompanionRecord {
    pub samples: usize,
    pub subbands: usize,
}

impl Default for CompanionRecord {
    fn default() -> Self {
        Self { samples: 4096, subbands: 32 }
    }
}

/// The per-trial simulation shared by calibration and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialModel {
    pub k: usize,
    pub n: usize,
    pub sigma2: f64,
    pub sigma2_mode: Sigma2Mode,
    pub companion: CompanionRecord,
}

impl TrialModel {
    pub fn oracle(k: usize, n: usize, sigma2: f64) -> Self {
        Self { k, n, sigma2, sigma2_mode: Sigma2Mode::Oracle, companion: CompanionRecord::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::domain("K and N must be positive"));
        }
        if self.sigma2 <= 0.0 || !self.sigma2.is_finite() {
            return Err(Error::domain("noise variance must be positive"));
        }
        Ok(())
    }

    fn sigma2_hat(&self, trial_seed: u64) -> Result<f64> {
        match self.sigma2_mode {
            Sigma2Mode::Oracle => Ok(self.sigma2),
            Sigma2Mode::Estimated => {
                let scene = SpectrumScene::equal_width(1, &[0], 0.0, self.sigma2)?;
                let seed = derive_seed(trial_seed, Stream::Companion, 0);
                let record = generate_wideband_signal(&scene, self.companion.samples, seed)?;
                Ok(estimate_noise_known_count(&record, self.companion.subbands)?.sigma2_hat)
            }
        }
    }

    /// All detector statistics for one trial, in [`DetectorKind::ALL`]
    /// order. `snr_db = None` simulates H0.
    ///
    /// The channel draw depends only on the trial seed, so sweeping the SNR
    /// with a fixed seed rescales the same channel.
    pub fn trial(&self, trial_seed: u64, snr_db: Option<f64>) -> Result<[f64; 3]> {
        let array = match snr_db {
            Some(snr) => ReceiverArray::with_target_snr(
                self.k,
                snr,
                self.sigma2,
                derive_seed(trial_seed, Stream::ChannelGains, 0),
            )?,
            None => ReceiverArray::new(vec![Default::default(); self.k], self.sigma2)?,
        };
        let frame = generate_narrowband_frame(&array, self.n, snr_db.is_some(), trial_seed)?;
        let sigma2_hat = self.sigma2_hat(trial_seed)?;
        frame_statistics(&frame, sigma2_hat)
    }

    /// Runs `trials` trials on `stream`, in parallel, returned in trial order.
    pub fn simulate(&self, master_seed: u64, stream: Stream, trials: usize, snr_db: Option<f64>) -> Result<Vec<[f64; 3]>> {
        self.validate()?;
        (0..trials as u64)
            .into_par_iter()
            .map(|i| self.trial(derive_seed(master_seed, stream, i), snr_db))
            .collect()
    }
}

/// All three statistics of one frame, in [`DetectorKind::ALL`] order.
pub fn frame_statistics(frame: &SampleMatrix, sigma2_hat: f64) -> Result<[f64; 3]> {
    let spectrum = hermitian_eigenvalues(&sample_covariance(frame)?)?;
    Ok([
        mp_edge_statistic(&spectrum, sigma2_hat, frame.k_receivers(), frame.n_samples())?,
        energy_statistic(frame, sigma2_hat)?,
        agm_statistic(&spectrum)?,
    ])
}

pub fn detector_index(kind: DetectorKind) -> usize {
    DetectorKind::ALL.iter().position(|&k| k == kind).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub trials: usize,
    pub target_pfa: f64,
    pub master_seed: u64,
    pub k: usize,
    pub n: usize,
    pub sigma2: f64,
    pub sigma2_mode: Sigma2Mode,
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_CALIBRATION_TRIALS {
            return Err(Error::config(format!(
                "calibration needs at least {MIN_CALIBRATION_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
            return Err(Error::config(format!("target Pfa must lie in (0, 1), got {}", self.target_pfa)));
        }
        Ok(())
    }

    pub fn model(&self) -> TrialModel {
        TrialModel {
            k: self.k,
            n: self.n,
            sigma2: self.sigma2,
            sigma2_mode: self.sigma2_mode,
            companion: CompanionRecord::default(),
        }
    }
}

/// Provenance stored alongside a cached curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveMeta {
    pub detector: DetectorKind,
    pub k: usize,
    pub n: usize,
    pub sigma2_mode: Sigma2Mode,
    pub master_seed: u64,
    pub trials: usize,
}

/// Empirical H0 distribution of one detector statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCurve {
    meta: CurveMeta,
    by_trial: Vec<f64>,
    sorted: Vec<f64>,
}

/// A calibrated threshold. `degenerate` is set when every H0 sample was
/// identical, in which case no quantile inversion is possible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub alpha: f64,
    pub degenerate: bool,
}

impl CalibrationCurve {
    /// `statistics` in trial order.
    pub fn new(meta: CurveMeta, statistics: Vec<f64>) -> Result<Self> {
        if statistics.len() < MIN_CALIBRATION_TRIALS {
            return Err(Error::domain(format!(
                "calibration curve needs at least {MIN_CALIBRATION_TRIALS} samples, got {}",
                statistics.len()
            )));
        }
        if statistics.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite H0 statistic".into()));
        }
        let mut sorted = statistics.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { meta: CurveMeta { trials: statistics.len(), ..meta }, by_trial: statistics, sorted })
    }

    pub fn meta(&self) -> &CurveMeta {
        &self.meta
    }

    /// Ascending H0 statistics.
    pub fn h0_statistics(&self) -> &[f64] {
        &self.sorted
    }

    pub fn by_trial(&self) -> &[f64] {
        &self.by_trial
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of H0 samples strictly above `alpha`.
    pub fn pfa_at(&self, alpha: f64) -> f64 {
        let at_or_below = self.sorted.partition_point(|&x| x <= alpha);
        (self.sorted.len() - at_or_below) as f64 / self.sorted.len() as f64
    }

    /// Empirical `(1 - target_pfa)`-quantile with linear interpolation
    /// between the bracketing order statistics.
    pub fn threshold_for(&self, target_pfa: f64) -> Result<Threshold> {
        if !(target_pfa > 0.0 && target_pfa < 1.0) {
            return Err(Error::domain(format!("target Pfa must lie in (0, 1), got {target_pfa}")));
        }
        let x = &self.sorted;
        let (first, last) = (x[0], x[x.len() - 1]);
        if first == last {
            log::warn!("all {} H0 samples equal {first}; threshold is degenerate", x.len());
            return Ok(Threshold { alpha: first, degenerate: true });
        }
        let pos = (1.0 - target_pfa) * (x.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(x.len() - 1);
        let frac = pos - lo as f64;
        Ok(Threshold { alpha: x[lo] + frac * (x[hi] - x[lo]), degenerate: false })
    }

    /// Writes `trial,statistic` rows to `csv_path` and the metadata to the
    /// sidecar `csv_path.with_extension("json")`.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(csv_path)?;
        writer.write_record(["trial", "statistic"])?;
        for (i, x) in self.by_trial.iter().enumerate() {
            writer.write_record([i.to_string(), x.to_string()])?;
        }
        writer.flush()?;
        fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let meta: CurveMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
        let mut reader = csv::Reader::from_path(csv_path)?;
        let header = reader.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["trial", "statistic"] {
            return Err(Error::config(format!("unexpected calibration header {header:?}")));
        }
        let mut statistics = Vec::new();
        for (expected, record) in reader.records().enumerate() {
            let record = record?;
            let parse_err = || Error::config(format!("malformed calibration row {}", expected + 1));
            let trial: usize = record.get(0).and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            let value: f64 = record.get(1).and_then(|s| s.parse().ok()).ok_or_else(parse_err)?;
            if trial != expected {
                return Err(Error::config(format!("calibration rows out of order at trial {trial}")));
            }
            statistics.push(value);
        }
        if statistics.len() != meta.trials {
            return Err(Error::config(format!(
                "sidecar declares {} trials but file holds {}",
                meta.trials,
                statistics.len()
            )));
        }
        Self::new(meta, statistics)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Simulates `config.trials` noise-only frames on the calibration stream.
pub fn simulate_h0(config: &CalibrationConfig, detector: DetectorKind) -> Result<CalibrationCurve> {
    config.validate()?;
    let stats = config
        .model()
        .simulate(config.master_seed, Stream::Calibration, config.trials, None)?;
    curve_from_trials(config, detector, &stats)
}

/// Builds the curve of one detector from trials simulated for all three.
pub fn curve_from_trials(config: &CalibrationConfig, detector: DetectorKind, stats: &[[f64; 3]]) -> Result<CalibrationCurve> {
    let idx = detector_index(detector);
    let meta = CurveMeta {
        detector,
        k: config.k,
        n: config.n,
        sigma2_mode: config.sigma2_mode,
        master_seed: config.master_seed,
        trials: stats.len(),
    };
    CalibrationCurve::new(meta, stats.iter().map(|s| s[idx]).collect())
}
