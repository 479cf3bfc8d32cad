//! GLRT estimate of the number of unused subbands and the noise variance.
//!
//! With the energies sorted ascending, the first `M` subbands are taken as
//! noise-only with common variance `sigma2` and the remaining `k - M` as
//! occupied with common variance `sigma1^2`. Maximising the complex
//! Gaussian likelihood over both variances leaves, up to terms that do not
//! depend on `M`,
//!
//! ```text
//! J(M) = M L ln(S_M / (M L)) + (k - M) L ln(T_M / ((k - M) L)) - ln P(M)
//! ```
//!
//! where `S_M` sums the `M` smallest energies and `T_M` the rest. The
//! occupied term vanishes at `M = k`.

use super::{SubbandEnergies, UsagePrior};
use crate::error::{Error, Result};

/// Relative gap below which two objective values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    KnownPrior,
    KnownCount,
    UnknownCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    pub sigma2_hat: f64,
    pub m_hat: usize,
    /// Per-sample power `E_r / L` of each subband classified as occupied,
    /// in ascending energy order.
    pub occupied_variances: Vec<f64>,
    pub scenario: Scenario,
}

/// Prior-free part of the objective for a candidate `m` (1-based count).
pub fn glrt_objective(energies: &SubbandEnergies, m: usize) -> Result<f64> {
    check_positive(energies)?;
    let k = energies.k();
    if m == 0 || m > k {
        return Err(Error::domain(format!("candidate M = {m} outside 1..={k}")));
    }
    let l = energies.samples_per_subband() as f64;
    let e = energies.energies();
    let noise: f64 = e[..m].iter().sum();
    let occupied: f64 = e[m..].iter().sum();
    Ok(pooled_term(noise, m, l) + pooled_term(occupied, k - m, l))
}

fn pooled_term(sum: f64, count: usize, l: f64) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let samples = count as f64 * l;
    samples * (sum / samples).ln()
}

fn check_positive(energies: &SubbandEnergies) -> Result<()> {
    // Ascending, so checking the first entry suffices.
    if energies.energies()[0] <= 0.0 {
        return Err(Error::domain("zero subband energy: the likelihood is unbounded"));
    }
    Ok(())
}

/// Maximum a posteriori count of unused subbands under `prior`.
///
/// Candidates with `P(M) = 0` are skipped; ties go to the larger `M`.
pub fn estimate_m(energies: &SubbandEnergies, prior: &UsagePrior) -> Result<usize> {
    let k = energies.k();
    if prior.k() != k {
        return Err(Error::domain(format!(
            "prior covers {} subbands but {k} energies were given",
            prior.k()
        )));
    }
    check_positive(energies)?;
    let p_max = prior.pmf().iter().cloned().fold(0.0, f64::max);
    if p_max <= 0.0 {
        return Err(Error::domain("prior assigns zero probability to every M"));
    }

    let l = energies.samples_per_subband() as f64;
    let e = energies.energies();
    // suffix[m] = sum of e[m..]
    let mut suffix = vec![0.0; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + e[i];
    }
    let mut noise = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for m in 1..=k {
        noise += e[m - 1];
        let p = prior.probability(m);
        if p <= 0.0 {
            continue;
        }
        let occupied = suffix[m];
        // ln(p_max / p) differs from -ln p by a constant and is exactly zero
        // for a uniform prior.
        let score = pooled_term(noise, m, l) + pooled_term(occupied, k - m, l) + (p_max / p).ln();
        best = match best {
            Some((_, b)) if score > b + TIE_TOLERANCE * b.abs().max(score.abs()).max(1.0) => best,
            _ => Some((m, score)),
        };
    }
    best.map(|(m, _)| m)
        .ok_or_else(|| Error::domain("prior assigns zero probability to every M"))
}

/// [`estimate_m`] under the uniform prior.
pub fn estimate_m_uniform(energies: &SubbandEnergies) -> Result<usize> {
    estimate_m(energies, &UsagePrior::uniform(energies.k())?)
}

/// Noise variance from the `m_hat` smallest energies,
/// `sigma2_hat = (1 / (m_hat L)) * sum`.
pub fn noise_variance(energies: &SubbandEnergies, m_hat: usize, scenario: Scenario) -> Result<NoiseEstimate> {
    let k = energies.k();
    if m_hat == 0 || m_hat > k {
        return Err(Error::domain(format!("m_hat = {m_hat} outside 1..={k}")));
    }
    let l = energies.samples_per_subband() as f64;
    let e = energies.energies();
    let sigma2_hat = e[..m_hat].iter().sum::<f64>() / (m_hat as f64 * l);
    Ok(NoiseEstimate {
        sigma2_hat,
        m_hat,
        occupied_variances: e[m_hat..].iter().map(|x| x / l).collect(),
        scenario,
    })
}

/// Per-sample power of the weakest subband.
pub fn min_energy_noise(energies: &SubbandEnergies) -> f64 {
    energies.energies()[0] / energies.samples_per_subband() as f64
}
