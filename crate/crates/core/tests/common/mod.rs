//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use widesense::detector::SampleCovariance;
use widesense::harness::{Cell, ExperimentSpec, ResultTable};

/// Brute-force MAP count of unused subbands: evaluates every candidate from
/// scratch on a fresh sort of the raw energies. Ties (relative gap below
/// 1e-9) go to the larger count.
pub fn glrt_oracle(raw: &[f64], l: usize, pmf: &[f64]) -> usize {
    let mut e = raw.to_vec();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = e.len();
    let l = l as f64;
    let mut best_m = 0;
    let mut best = f64::INFINITY;
    for m in 1..=k {
        if pmf[m - 1] <= 0.0 {
            continue;
        }
        let mut j = -pmf[m - 1].ln();
        let s: f64 = e.iter().take(m).sum();
        j += m as f64 * l * (s / (m as f64 * l)).ln();
        if m < k {
            let t: f64 = e.iter().skip(m).sum();
            let n1 = (k - m) as f64 * l;
            j += n1 * (t / n1).ln();
        }
        if j <= best + 1e-9 * best.abs().max(1.0) {
            best = j.min(best);
            best_m = m;
        }
    }
    best_m
}

pub fn uniform_pmf(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

pub fn cn(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    // Box-Muller, kept separate from the library's sampler
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(s * r * th.cos(), s * r * th.sin())
}

/// `h h^H + sigma2 I`.
pub fn rank_one_plus_identity(h: &[Complex64], sigma2: f64) -> SampleCovariance {
    let k = h.len();
    let m = DMatrix::from_fn(k, k, |i, j| {
        h[i] * h[j].conj() + if i == j { Complex64::new(sigma2, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    SampleCovariance::from_matrix(m).unwrap()
}

/// Spec from inline JSON; panics on invalid config.
pub fn spec(json: &str) -> ExperimentSpec {
    ExperimentSpec::from_json(json).unwrap()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Rows of `table` whose `column` renders as `value`.
pub fn rows_where<'a>(table: &'a ResultTable, column: &str, value: &str) -> Vec<&'a [Cell]> {
    let idx = table.column_index(column).unwrap();
    table.rows.iter().filter(|r| r[idx].to_string() == value).map(|r| r.as_slice()).collect()
}

pub fn float(table: &ResultTable, row: &[Cell], column: &str) -> f64 {
    match &row[table.column_index(column).unwrap()] {
        Cell::Float(v) => *v,
        Cell::Int(v) => *v as f64,
        Cell::Text(s) => s.parse().unwrap(),
    }
}
