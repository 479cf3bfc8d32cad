use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::{CompanionRecord, Sigma2Mode};
use crate::detector::DetectorKind;
use crate::error::{Error, Result};
use crate::noise::{PriorSpec, SegmentationParams};
use crate::sim::SpectrumScene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    MpCheck,
    NoiseErrorEqual,
    NoiseErrorAdaptive,
    PfaCurve,
    Roc,
    PdVsSnr,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MpCheck => "mp-check",
            Experiment::NoiseErrorEqual => "noise-error-equal",
            Experiment::NoiseErrorAdaptive => "noise-error-adaptive",
            Experiment::PfaCurve => "pfa-curve",
            Experiment::Roc => "roc",
            Experiment::PdVsSnr => "pd-vs-snr",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_k() -> usize {
    7
}
fn default_n() -> usize {
    100
}
fn default_trials() -> usize {
    10_000
}
fn default_sigma2() -> f64 {
    1.0
}
fn default_margin() -> f64 {
    0.05
}
fn default_grid_points() -> usize {
    101
}

/// Experiment configuration; the JSON config mirrors it field for field
/// and rejects unknown keys. Optional lists fall back to per-experiment
/// defaults (see the accessors).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Evaluation trials per grid point.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// H0 calibration trials; defaults to `trials`.
    #[serde(default)]
    pub calibration_trials: Option<usize>,
    #[serde(default)]
    pub snr_db: Option<Vec<f64>>,
    #[serde(default)]
    pub subband_counts: Option<Vec<usize>>,
    #[serde(default)]
    pub target_pfa: Option<Vec<f64>>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub scene: Option<PathBuf>,
    #[serde(default)]
    pub prior: Option<PriorSpec>,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    #[serde(default = "default_sigma2_mode")]
    pub sigma2_mode: Sigma2Mode,
    #[serde(default)]
    pub detectors: Option<Vec<DetectorKind>>,
    /// `(K, N)` pairs for `mp-check`; defaults to `[(k, n)]`.
    #[serde(default)]
    pub mp_dims: Option<Vec<[usize; 2]>>,
    /// Eigenvalues within `margin * b` outside `[a, b]` count as inside.
    #[serde(default = "default_margin")]
    pub support_margin: f64,
    /// Wideband record length for the noise-error experiments.
    #[serde(default)]
    pub wideband_samples: Option<usize>,
    #[serde(default)]
    pub segmentation: SegmentationParams,
    #[serde(default)]
    pub companion: CompanionRecord,
    /// Threshold grid size for `pfa-curve`.
    #[serde(default = "default_grid_points")]
    pub pfa_grid_points: usize,
}

fn default_sigma2_mode() -> Sigma2Mode {
    Sigma2Mode::Oracle
}

pub const ROC_PFA_GRID: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];

impl Default for ExperimentSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config uses defaults")
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    /// Reads a config file; relative `scene` and `output` paths are taken
    /// relative to the config file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut spec = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [&mut spec.scene, &mut spec.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(spec)
    }

    pub fn calibration_trials(&self) -> usize {
        self.calibration_trials.unwrap_or(self.trials)
    }

    pub fn snr_grid(&self, experiment: Experiment) -> Vec<f64> {
        self.snr_db.clone().unwrap_or_else(|| match experiment {
            Experiment::PdVsSnr => (0..=10).map(|i| -20.0 + 2.0 * i as f64).collect(),
            Experiment::Roc => vec![-10.0],
            _ => vec![-5.0],
        })
    }

    pub fn pfa_grid(&self, experiment: Experiment) -> Vec<f64> {
        self.target_pfa.clone().unwrap_or_else(|| match experiment {
            Experiment::PdVsSnr => vec![0.1],
            _ => ROC_PFA_GRID.to_vec(),
        })
    }

    pub fn subband_grid(&self) -> Vec<usize> {
        self.subband_counts.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64])
    }

    pub fn detector_list(&self) -> Vec<DetectorKind> {
        self.detectors.clone().unwrap_or_else(|| DetectorKind::ALL.to_vec())
    }

    pub fn mp_pairs(&self) -> Vec<(usize, usize)> {
        self.mp_dims
            .as_ref()
            .map(|d| d.iter().map(|&[k, n]| (k, n)).collect())
            .unwrap_or_else(|| vec![(self.k, self.n)])
    }

    pub fn wideband_len(&self, experiment: Experiment) -> usize {
        self.wideband_samples.unwrap_or(match experiment {
            Experiment::NoiseErrorAdaptive => 1 << 16,
            _ => 4096,
        })
    }

    pub fn load_scene(&self) -> Result<Option<SpectrumScene>> {
        match &self.scene {
            None => Ok(None),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::config(format!("cannot read scene {}: {e}", path.display())))?;
                SpectrumScene::from_json(&text)
                    .map(Some)
                    .map_err(|e| Error::config(format!("invalid scene {}: {e}", path.display())))
            }
        }
    }

    /// Checks the settings `experiment` depends on.
    pub fn validate(&self, experiment: Experiment) -> Result<()> {
        if let Some(declared) = self.experiment {
            if declared != experiment {
                return Err(Error::config(format!(
                    "config declares experiment {declared} but {experiment} was requested"
                )));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.k == 0 || self.n == 0 {
            return Err(Error::config("k and n must be positive"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::config("sigma2 must be positive"));
        }
        if self.snr_grid(experiment).iter().any(|s| !s.is_finite()) {
            return Err(Error::config("SNR values must be finite"));
        }
        match experiment {
            Experiment::Roc | Experiment::PdVsSnr | Experiment::PfaCurve => {
                if self.calibration_trials() < crate::calibration::MIN_CALIBRATION_TRIALS {
                    return Err(Error::config(format!(
                        "calibration needs at least {} trials",
                        crate::calibration::MIN_CALIBRATION_TRIALS
                    )));
                }
                if let Some(p) = self.pfa_grid(experiment).into_iter().find(|p| !(*p > 0.0 && *p < 1.0)) {
                    return Err(Error::config(format!("target Pfa {p} outside (0, 1)")));
                }
                if self.detector_list().is_empty() {
                    return Err(Error::config("no detectors selected"));
                }
            }
            Experiment::MpCheck => {
                if self.mp_pairs().iter().any(|&(k, n)| k == 0 || n == 0) {
                    return Err(Error::config("mp_dims entries must be positive"));
                }
            }
            Experiment::NoiseErrorEqual => {
                let len = self.wideband_len(experiment);
                if let Some(k) = self.subband_grid().into_iter().find(|&k| k == 0 || !len.is_multiple_of(k)) {
                    return Err(Error::config(format!(
                        "subband count {k} does not divide the record length {len}"
                    )));
                }
            }
            Experiment::NoiseErrorAdaptive => {}
        }
        Ok(())
    }

    /// SHA-256 (hex, first 16 bytes) over the canonical JSON of the spec
    /// with the output path removed, plus the scene contents.
    pub fn config_hash(&self, experiment: Experiment) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.experiment = Some(experiment);
        let scene = self.load_scene()?;
        canonical.scene = None;
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&canonical)?);
        if let Some(scene) = scene {
            hasher.update(b"\0scene\0");
            hasher.update(serde_json::to_vec(&scene)?);
        }
        Ok(hex::encode(&hasher.finalize()[..16]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_setup() {
        let spec = ExperimentSpec::default();
        assert_eq!((spec.k, spec.n, spec.trials), (7, 100, 10_000));
        assert_eq!(spec.pfa_grid(Experiment::Roc), ROC_PFA_GRID.to_vec());
        let snr = spec.snr_grid(Experiment::PdVsSnr);
        assert_eq!(snr.len(), 11);
        assert_eq!(snr[0], -20.0);
        assert_eq!(snr[10], 0.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentSpec::from_json(r#"{"K": 7}"#), Err(Error::Config(_))));
        assert!(ExperimentSpec::from_json(r#"{"k": 5, "prior": {"kind": "uniform"}}"#).is_ok());
    }

    #[test]
    fn validation_catches_bad_grids() {
        let spec = ExperimentSpec::from_json(r#"{"target_pfa": [0.1, 1.0]}"#).unwrap();
        assert!(spec.validate(Experiment::Roc).is_err());
        let spec = ExperimentSpec::from_json(r#"{"subband_counts": [3]}"#).unwrap();
        assert!(spec.validate(Experiment::NoiseErrorEqual).is_err());
        let spec = ExperimentSpec::from_json(r#"{"experiment": "roc"}"#).unwrap();
        assert!(spec.validate(Experiment::PdVsSnr).is_err());
        assert!(spec.validate(Experiment::Roc).is_ok());
    }

    #[test]
    fn hash_ignores_output_but_not_seed() {
        let a = ExperimentSpec::from_json(r#"{"output": "a.csv"}"#).unwrap();
        let b = ExperimentSpec::from_json(r#"{"output": "b.csv"}"#).unwrap();
        let c = ExperimentSpec::from_json(r#"{"master_seed": 3}"#).unwrap();
        let h = |s: &ExperimentSpec| s.config_hash(Experiment::Roc).unwrap();
        assert_eq!(h(&a), h(&b));
        assert_ne!(h(&a), h(&c));
        assert_ne!(h(&a), a.config_hash(Experiment::PdVsSnr).unwrap());
    }
}
