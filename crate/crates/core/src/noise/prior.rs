use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PMF_SUM_TOLERANCE: f64 = 1e-9;

/// Prior as written in a config file:
/// `{"kind":"uniform"}`, `{"kind":"table","pmf":[...]}` or
/// `{"kind":"erlang","shape":2,"rate":0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PriorSpec {
    Uniform {},
    Table { pmf: Vec<f64> },
    Erlang { shape: u32, rate: f64 },
}

impl PriorSpec {
    /// Materialises the prior over `M = 1..=k`.
    pub fn resolve(&self, k: usize) -> Result<UsagePrior> {
        match self {
            PriorSpec::Uniform {} => UsagePrior::uniform(k),
            PriorSpec::Table { pmf } => {
                if pmf.len() != k {
                    return Err(Error::config(format!(
                        "table prior has {} entries but there are {k} subbands",
                        pmf.len()
                    )));
                }
                UsagePrior::table(pmf.clone())
            }
            PriorSpec::Erlang { shape, rate } => UsagePrior::erlang(*shape, *rate, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorKind {
    Uniform,
    Table,
    Erlang { shape: u32, rate: f64 },
}

/// Probability mass `P(M)` over the number of unused subbands
/// `M = 1..=k`; `pmf()[M - 1] = P(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UsagePrior {
    kind: PriorKind,
    pmf: Vec<f64>,
}

impl UsagePrior {
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("prior needs at least one subband"));
        }
        Ok(Self { kind: PriorKind::Uniform, pmf: vec![1.0 / k as f64; k] })
    }

    pub fn table(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::domain("prior needs at least one subband"));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("prior probabilities must be finite and nonnegative"));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::config(format!("prior probabilities sum to {sum}, not 1")));
        }
        Ok(Self { kind: PriorKind::Table, pmf })
    }

    /// Erlang density `rate^shape M^(shape-1) e^(-rate M) / (shape-1)!`
    /// evaluated at the integers `1..=k` and renormalised.
    pub fn erlang(shape: u32, rate: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("prior needs at least one subband"));
        }
        if shape == 0 {
            return Err(Error::config("erlang shape must be a positive integer"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::config(format!("erlang rate must be positive, got {rate}")));
        }
        // The normalising constant cancels, so work with log-weights only.
        let log_w: Vec<f64> = (1..=k)
            .map(|m| (shape - 1) as f64 * (m as f64).ln() - rate * m as f64)
            .collect();
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        Ok(Self { kind: PriorKind::Erlang { shape, rate }, pmf: w.into_iter().map(|x| x / total).collect() })
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn k(&self) -> usize {
        self.pmf.len()
    }

    /// `P(M)` for `1 <= m <= k`, zero otherwise.
    pub fn probability(&self, m: usize) -> f64 {
        if m == 0 { 0.0 } else { self.pmf.get(m - 1).copied().unwrap_or(0.0) }
    }
}
