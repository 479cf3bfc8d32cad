mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use widesense::calibration::{detector_index, TrialModel};
use widesense::detector::{
    agm_statistic, decide, energy_statistic, hermitian_eigenvalues, mp_edge_statistic, sample_covariance,
    DetectorKind, Hypothesis, SampleCovariance,
};
use widesense::seed::{rng_from_seed, Stream};
use widesense::sim::SampleMatrix;

use common::cn;

fn random_matrix(k: usize, n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(k, n, |_, _| cn(&mut rng, 1.0))
}

fn random_hermitian(k: usize, seed: u64) -> DMatrix<Complex64> {
    let a = random_matrix(k, k, seed);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

#[test]
fn eigenvalues_agree_with_reference_solver() {
    for seed in 0..100 {
        let k = 2 + (seed as usize % 15);
        let m = random_hermitian(k, seed);
        let ours = hermitian_eigenvalues(&SampleCovariance::from_matrix(m.clone()).unwrap()).unwrap();
        let mut reference: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|a, b| b.total_cmp(a));
        let scale = reference.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (a, b) in ours.values().iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-10 * scale, "seed {seed}: {a} vs {b}");
        }
        assert!(ours.residual_bound() <= 1e-10 * scale);
    }
}

#[test]
fn trace_identity() {
    for seed in 0..50 {
        let m = random_hermitian(8, 500 + seed);
        let cov = SampleCovariance::from_matrix(m).unwrap();
        let sum: f64 = hermitian_eigenvalues(&cov).unwrap().values().iter().sum();
        assert!((sum - cov.trace()).abs() <= 1e-9 * cov.trace().abs().max(1.0));
    }
}

#[test]
fn noise_only_statistic_sits_near_one() {
    let stats = TrialModel::oracle(7, 100, 1.0).simulate(1, Stream::Calibration, 2000, None).unwrap();
    let mut t: Vec<f64> = stats.iter().map(|s| s[detector_index(DetectorKind::MpEdge)]).collect();
    t.sort_by(|a, b| a.total_cmp(b));
    let p95 = t[(0.95 * t.len() as f64) as usize];
    assert!(p95 > 0.8 && p95 < 1.3, "95th percentile {p95}");
}

#[test]
fn h1_statistic_dominates_h0() {
    let model = TrialModel::oracle(7, 100, 1.0);
    let h0 = model.simulate(2, Stream::EvaluationH0, 10_000, None).unwrap();
    let h1 = model.simulate(2, Stream::EvaluationH1, 10_000, Some(-10.0)).unwrap();
    let idx = detector_index(DetectorKind::MpEdge);
    let sorted = |s: &[[f64; 3]]| {
        let mut v: Vec<f64> = s.iter().map(|x| x[idx]).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    };
    let (a, b) = (sorted(&h0), sorted(&h1));
    for d in 1..10 {
        let i = d * a.len() / 10;
        assert!(b[i] >= a[i], "decile {d}: H1 {} < H0 {}", b[i], a[i]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_are_jointly_scale_equivariant(seed in any::<u64>(), c in 0.05f64..20.0, sigma2 in 0.1f64..10.0) {
        let (k, n) = (4, 24);
        let y = SampleMatrix::from_raw(random_matrix(k, n, seed)).unwrap();
        let yc = y.scaled(c);
        let s = hermitian_eigenvalues(&sample_covariance(&y).unwrap()).unwrap();
        let sc = hermitian_eigenvalues(&sample_covariance(&yc).unwrap()).unwrap();
        for (a, b) in s.values().iter().zip(sc.values()) {
            prop_assert!((b - c * c * a).abs() <= 1e-10 * c * c * s.largest());
        }
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
        prop_assert!(rel(mp_edge_statistic(&s, sigma2, k, n).unwrap(), mp_edge_statistic(&sc, c * c * sigma2, k, n).unwrap()) <= 1e-10);
        prop_assert!(rel(energy_statistic(&y, sigma2).unwrap(), energy_statistic(&yc, c * c * sigma2).unwrap()) <= 1e-10);
        prop_assert!(rel(agm_statistic(&s).unwrap(), agm_statistic(&sc).unwrap()) <= 1e-10);
    }

    #[test]
    fn raising_threshold_never_creates_detections(t in -10f64..10.0, a1 in -10f64..10.0, delta in 0f64..10.0) {
        if decide(t, a1) == Hypothesis::H0 {
            prop_assert_eq!(decide(t, a1 + delta), Hypothesis::H0);
        }
    }
}
