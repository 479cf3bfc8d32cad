use num_complex::Complex64;
use rayon::prelude::*;

use super::{Experiment, ExperimentSpec, ResultTable};
use crate::calibration::{curve_from_trials, detector_index, CalibrationConfig, TrialModel};
use crate::detector::{hermitian_eigenvalues, sample_covariance};
use crate::error::Result;
use crate::noise::{
    estimate_m, estimate_m_uniform, noise_variance, segment_and_estimate, subband_energies,
    NoiseEstimate, Scenario,
};
use crate::rmt::{build_esd, ks_distance, MarchenkoPasturLaw};
use crate::seed::{derive_seed, Stream};
use crate::sim::{
    db_to_linear, generate_narrowband_frame, generate_wideband_signal, ReceiverArray, SpectrumScene,
    Subband,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseErrorMode {
    Equal,
    Adaptive,
}

impl NoiseErrorMode {
    fn name(self) -> &'static str {
        match self {
            NoiseErrorMode::Equal => "equal",
            NoiseErrorMode::Adaptive => "adaptive",
        }
    }

    fn experiment(self) -> Experiment {
        match self {
            NoiseErrorMode::Equal => Experiment::NoiseErrorEqual,
            NoiseErrorMode::Adaptive => Experiment::NoiseErrorAdaptive,
        }
    }
}

/// Runs `experiment` after validating the spec against it.
pub fn run(spec: &ExperimentSpec, experiment: Experiment) -> Result<ResultTable> {
    spec.validate(experiment)?;
    match experiment {
        Experiment::MpCheck => run_mp_check(spec),
        Experiment::NoiseErrorEqual => run_noise_error(spec, NoiseErrorMode::Equal),
        Experiment::NoiseErrorAdaptive => run_noise_error(spec, NoiseErrorMode::Adaptive),
        Experiment::PfaCurve => run_pfa_curve(spec),
        Experiment::Roc => run_roc(spec),
        Experiment::PdVsSnr => run_pd_vs_snr(spec),
    }
}

fn table(spec: &ExperimentSpec, experiment: Experiment, columns: &[&str]) -> Result<ResultTable> {
    Ok(ResultTable::new(experiment.name(), columns, spec.config_hash(experiment)?, spec.master_seed))
}

/// Per-trial KS distance to the MP law and fraction of eigenvalues inside
/// the (margin-widened) support.
pub fn run_mp_check(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut out = table(spec, Experiment::MpCheck, &["K", "N", "trial", "ks", "in_support_frac"])?;
    for (k, n) in spec.mp_pairs() {
        let law = MarchenkoPasturLaw::for_dimensions(spec.sigma2, k, n)?;
        let array = ReceiverArray::new(vec![Complex64::new(0.0, 0.0); k], spec.sigma2)?;
        let margin = spec.support_margin * law.b();
        let rows: Vec<(f64, f64)> = (0..spec.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_seed(spec.master_seed, Stream::Eigen, trial);
                let frame = generate_narrowband_frame(&array, n, false, seed)?;
                let spectrum = hermitian_eigenvalues(&sample_covariance(&frame)?)?;
                let esd = build_esd(spectrum.values())?;
                let ks = ks_distance(&esd, &law)?;
                Ok((ks, esd.fraction_within(law.a() - margin, law.b() + margin)))
            })
            .collect::<Result<_>>()?;
        for (trial, (ks, frac)) in rows.into_iter().enumerate() {
            out.push(vec![k.into(), n.into(), trial.into(), ks.into(), frac.into()]);
        }
    }
    Ok(out)
}

/// 32 equal subbands, 8 of them unused, primaries at `snr_db` above the
/// noise PSD level.
pub fn default_equal_scene(sigma2: f64, snr_db: f64) -> Result<SpectrumScene> {
    SpectrumScene::equal_width(32, &[1, 5, 9, 14, 18, 22, 26, 30], sigma2 * db_to_linear(snr_db), sigma2)
}

/// Eight subbands of unequal width (multiples of 1/16), three unused.
pub fn default_adaptive_scene(sigma2: f64, snr_db: f64) -> Result<SpectrumScene> {
    let widths = [2, 1, 3, 2, 1, 2, 3, 2];
    let occupied = [true, false, true, false, true, true, false, true];
    let power = sigma2 * db_to_linear(snr_db);
    let mut start = 0;
    let subbands = widths
        .iter()
        .zip(occupied)
        .map(|(&w, occ)| {
            let band = Subband {
                start: start as f64 / 16.0,
                end: (start + w) as f64 / 16.0,
                occupied: occ,
                power: if occ { power } else { 0.0 },
            };
            start += w;
            band
        })
        .collect();
    SpectrumScene::new(1.0, subbands, sigma2)
}

fn equal_width_estimate(spec: &ExperimentSpec, signal: &[Complex64], k: usize) -> Result<NoiseEstimate> {
    let energies = subband_energies(signal, k, None)?;
    match &spec.prior {
        Some(prior) => noise_variance(&energies, estimate_m(&energies, &prior.resolve(k)?)?, Scenario::KnownPrior),
        None => noise_variance(&energies, estimate_m_uniform(&energies)?, Scenario::KnownCount),
    }
}

/// Relative noise-variance error per trial, either over a sweep of
/// equal-width subband counts or through edge-based segmentation.
/// Estimation failures become rows with `status = failed`.
pub fn run_noise_error(spec: &ExperimentSpec, mode: NoiseErrorMode) -> Result<ResultTable> {
    let experiment = mode.experiment();
    let mut out = table(spec, experiment, &["mode", "k", "trial", "sigma2_hat", "rel_error", "status"])?;
    let snr = spec.snr_grid(experiment)[0];
    let scene = match spec.load_scene()? {
        Some(scene) => scene,
        None => match mode {
            NoiseErrorMode::Equal => default_equal_scene(spec.sigma2, snr)?,
            NoiseErrorMode::Adaptive => default_adaptive_scene(spec.sigma2, snr)?,
        },
    };
    let truth = scene.noise_sigma2();
    let len = spec.wideband_len(experiment);
    let counts = spec.subband_grid();

    // per trial: one (k, estimate) entry per grid point
    let per_trial: Vec<Vec<(usize, Option<f64>)>> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let signal = generate_wideband_signal(&scene, len, derive_seed(spec.master_seed, Stream::Wideband, trial))?;
            Ok(match mode {
                NoiseErrorMode::Equal => counts
                    .iter()
                    .map(|&k| (k, equal_width_estimate(spec, &signal, k).ok().map(|e| e.sigma2_hat)))
                    .collect(),
                NoiseErrorMode::Adaptive => {
                    match segment_and_estimate(&signal, &spec.segmentation, spec.prior.as_ref()) {
                        Ok(s) => vec![(s.subband_count, Some(s.estimate.sigma2_hat))],
                        Err(e) => {
                            log::debug!("trial {trial}: segmentation failed: {e}");
                            vec![(0, None)]
                        }
                    }
                }
            })
        })
        .collect::<Result<_>>()?;

    let grid_points = per_trial.first().map_or(0, Vec::len);
    for point in 0..grid_points {
        for (trial, results) in per_trial.iter().enumerate() {
            let (k, estimate) = results[point];
            let row = match estimate {
                Some(s) => vec![
                    mode.name().into(),
                    k.into(),
                    trial.into(),
                    s.into(),
                    ((s - truth).abs() / truth).into(),
                    "ok".into(),
                ],
                None => vec![
                    mode.name().into(),
                    k.into(),
                    trial.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    "failed".into(),
                ],
            };
            out.push(row);
        }
    }
    Ok(out)
}

fn trial_model(spec: &ExperimentSpec) -> TrialModel {
    TrialModel {
        k: spec.k,
        n: spec.n,
        sigma2: spec.sigma2,
        sigma2_mode: spec.sigma2_mode,
        companion: spec.companion,
    }
}

fn calibration_config(spec: &ExperimentSpec, target_pfa: f64) -> CalibrationConfig {
    CalibrationConfig {
        trials: spec.calibration_trials(),
        target_pfa,
        master_seed: spec.master_seed,
        k: spec.k,
        n: spec.n,
        sigma2: spec.sigma2,
        sigma2_mode: spec.sigma2_mode,
    }
}

fn fraction_above(stats: &[[f64; 3]], idx: usize, alpha: f64) -> f64 {
    stats.iter().filter(|s| s[idx] > alpha).count() as f64 / stats.len() as f64
}

/// Empirical Pfa as a function of the threshold over the H0 sample range.
pub fn run_pfa_curve(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut out = table(spec, Experiment::PfaCurve, &["detector", "alpha", "pfa"])?;
    let model = trial_model(spec);
    let h0 = model.simulate(spec.master_seed, Stream::Calibration, spec.calibration_trials(), None)?;
    let config = calibration_config(spec, 0.5);
    let points = spec.pfa_grid_points.max(2);
    for detector in spec.detector_list() {
        let curve = curve_from_trials(&config, detector, &h0)?;
        let stats = curve.h0_statistics();
        let (lo, hi) = (stats[0], stats[stats.len() - 1]);
        for i in 0..points {
            let alpha = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            out.push(vec![detector.name().into(), alpha.into(), curve.pfa_at(alpha).into()]);
        }
    }
    Ok(out)
}

/// Calibrate on H0, then measure Pfa and Pd on fresh trials, per detector
/// and target Pfa.
pub fn run_roc(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut out = table(spec, Experiment::Roc, &["detector", "target_pfa", "empirical_pfa", "pd", "trials"])?;
    let model = trial_model(spec);
    let snr = spec.snr_grid(Experiment::Roc)[0];
    let calib = model.simulate(spec.master_seed, Stream::Calibration, spec.calibration_trials(), None)?;
    let eval_h0 = model.simulate(spec.master_seed, Stream::EvaluationH0, spec.trials, None)?;
    let eval_h1 = model.simulate(spec.master_seed, Stream::EvaluationH1, spec.trials, Some(snr))?;
    for detector in spec.detector_list() {
        let idx = detector_index(detector);
        for target in spec.pfa_grid(Experiment::Roc) {
            let curve = curve_from_trials(&calibration_config(spec, target), detector, &calib)?;
            let alpha = curve.threshold_for(target)?.alpha;
            out.push(vec![
                detector.name().into(),
                target.into(),
                fraction_above(&eval_h0, idx, alpha).into(),
                fraction_above(&eval_h1, idx, alpha).into(),
                spec.trials.into(),
            ]);
        }
    }
    Ok(out)
}

/// Pd across the SNR grid at a calibrated threshold for the first target
/// Pfa. H1 trials reuse the same seeds at every SNR point.
pub fn run_pd_vs_snr(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut out = table(spec, Experiment::PdVsSnr, &["detector", "snr_db", "pd", "empirical_pfa"])?;
    let model = trial_model(spec);
    let target = spec.pfa_grid(Experiment::PdVsSnr)[0];
    let calib = model.simulate(spec.master_seed, Stream::Calibration, spec.calibration_trials(), None)?;
    let eval_h0 = model.simulate(spec.master_seed, Stream::EvaluationH0, spec.trials, None)?;
    let snrs = spec.snr_grid(Experiment::PdVsSnr);
    let h1: Vec<Vec<[f64; 3]>> = snrs
        .iter()
        .map(|&snr| model.simulate(spec.master_seed, Stream::EvaluationH1, spec.trials, Some(snr)))
        .collect::<Result<_>>()?;
    for detector in spec.detector_list() {
        let idx = detector_index(detector);
        let curve = curve_from_trials(&calibration_config(spec, target), detector, &calib)?;
        let alpha = curve.threshold_for(target)?.alpha;
        let pfa = fraction_above(&eval_h0, idx, alpha);
        for (snr, stats) in snrs.iter().zip(&h1) {
            out.push(vec![
                detector.name().into(),
                (*snr).into(),
                fraction_above(stats, idx, alpha).into(),
                pfa.into(),
            ]);
        }
    }
    Ok(out)
}
