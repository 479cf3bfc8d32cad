//! Marchenko–Pastur law and empirical spectral distributions.
//!
//! For a `K x N` matrix `G` with i.i.d. zero-mean entries of variance
//! `sigma2`, the eigenvalues of `(1/N) G G^H` follow, as `K/N -> s`, the
//! law
//!
//! ```text
//! f(t) = (1 - 1/s)^+ delta(t) + sqrt((t - a)^+ (b - t)^+) / (2 pi s sigma2 t)
//! a = sigma2 (1 - sqrt(s))^2,   b = sigma2 (1 + sqrt(s))^2
//! ```
//!
//! The atom at zero is reported by [`MarchenkoPasturLaw::atom_mass`] and is
//! never folded into [`MarchenkoPasturLaw::density`].

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Eigenvalues more negative than this are treated as a broken eigensolve.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// Absolute error target of the CDF quadrature.
const CDF_QUADRATURE_TOLERANCE: f64 = 1e-10;
const MAX_SIMPSON_DEPTH: u32 = 48;

/// Support edges `(a, b)` of the law with noise variance `sigma2` and
/// aspect ratio `ratio_s = K/N`.
pub fn mp_support(sigma2: f64, ratio_s: f64) -> Result<(f64, f64)> {
    if sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if ratio_s <= 0.0 || !ratio_s.is_finite() {
        return Err(Error::domain(format!("ratio_s must be positive, got {ratio_s}")));
    }
    let root = ratio_s.sqrt();
    Ok((sigma2 * (1.0 - root).powi(2), sigma2 * (1.0 + root).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoPasturLaw {
    sigma2: f64,
    ratio_s: f64,
    a: f64,
    b: f64,
}

impl MarchenkoPasturLaw {
    pub fn new(sigma2: f64, ratio_s: f64) -> Result<Self> {
        let (a, b) = mp_support(sigma2, ratio_s)?;
        Ok(Self { sigma2, ratio_s, a, b })
    }

    /// Law for a `k x n` sample matrix.
    pub fn for_dimensions(sigma2: f64, k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        Self::new(sigma2, k as f64 / n as f64)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn ratio_s(&self) -> f64 {
        self.ratio_s
    }

    /// Lower support edge.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Upper support edge (the "MP edge").
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Mass of the atom at zero, `(1 - 1/s)^+`.
    pub fn atom_mass(&self) -> f64 {
        (1.0 - 1.0 / self.ratio_s).max(0.0)
    }

    /// Continuous part of the density at `t`.
    pub fn density(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::domain(format!("density evaluated at negative t = {t}")));
        }
        if t <= self.a || t >= self.b || t == 0.0 {
            return Ok(0.0);
        }
        let num = ((t - self.a) * (self.b - t)).sqrt();
        Ok(num / (2.0 * PI * self.ratio_s * self.sigma2 * t))
    }

    /// Cumulative distribution `P(lambda <= t)`, atom included.
    ///
    /// The continuous part is integrated after substituting
    /// `t = a + (b - a) sin^2(theta)`, which removes the square-root edge
    /// behaviour and leaves a smooth integrand on `[0, pi/2]`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::domain(format!("cdf evaluated at negative t = {t}")));
        }
        let atom = self.atom_mass();
        if t <= self.a {
            return Ok(atom);
        }
        if t >= self.b {
            // Continuous mass is min(1, 1/s); integrate anyway so that the
            // returned value is consistent with interior evaluations.
            return Ok(atom + self.continuous_mass_up_to_angle(PI / 2.0));
        }
        let frac = ((t - self.a) / (self.b - self.a)).clamp(0.0, 1.0);
        let theta = frac.sqrt().asin();
        Ok(atom + self.continuous_mass_up_to_angle(theta))
    }

    fn continuous_mass_up_to_angle(&self, theta_max: f64) -> f64 {
        let width = self.b - self.a;
        let scale = 1.0 / (PI * self.ratio_s * self.sigma2);
        let integrand = |theta: f64| {
            let (s, c) = theta.sin_cos();
            let t = self.a + width * s * s;
            if t <= 0.0 {
                // a = 0 and theta = 0: limit of width^2 s^2 c^2 / t.
                width * c * c * scale
            } else {
                width * width * s * s * c * c / t * scale
            }
        };
        adaptive_simpson(&integrand, 0.0, theta_max, CDF_QUADRATURE_TOLERANCE)
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, MAX_SIMPSON_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (flm, frm) = (f(lmid), f(rmid));
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1)
        + simpson_step(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1)
}

/// Step CDF of a finite eigenvalue set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectralDistribution {
    eigenvalues: Vec<f64>,
}

impl EmpiricalSpectralDistribution {
    /// Sorted ascending, never empty, all values `>= 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Fraction of eigenvalues `<= t`.
    pub fn cdf(&self, t: f64) -> f64 {
        let count = self.eigenvalues.partition_point(|&x| x <= t);
        count as f64 / self.eigenvalues.len() as f64
    }

    /// Fraction of eigenvalues inside `[lo, hi]`.
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let inside = self.eigenvalues.iter().filter(|&&x| x >= lo && x <= hi).count();
        inside as f64 / self.eigenvalues.len() as f64
    }
}

/// Builds an ESD, clamping eigensolver round-off below zero.
pub fn build_esd(eigenvalues: &[f64]) -> Result<EmpiricalSpectralDistribution> {
    if eigenvalues.is_empty() {
        return Err(Error::domain("empirical spectral distribution needs eigenvalues"));
    }
    let mut values = Vec::with_capacity(eigenvalues.len());
    for &x in eigenvalues {
        if x.is_nan() || x < -NEGATIVE_EIGENVALUE_TOLERANCE || x.is_infinite() {
            return Err(Error::domain(format!("invalid eigenvalue {x}")));
        }
        values.push(x.max(0.0));
    }
    values.sort_by(f64::total_cmp);
    Ok(EmpiricalSpectralDistribution { eigenvalues: values })
}

/// Kolmogorov–Smirnov distance between an ESD and the law, evaluated on
/// both sides of every jump of the empirical CDF.
pub fn ks_distance(esd: &EmpiricalSpectralDistribution, law: &MarchenkoPasturLaw) -> Result<f64> {
    let values = esd.eigenvalues();
    let n = values.len() as f64;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < values.len() {
        let x = values[i];
        let mut j = i;
        while j < values.len() && values[j] == x {
            j += 1;
        }
        let model = law.cdf(x)?;
        let below = i as f64 / n;
        let at = j as f64 / n;
        sup = sup.max((model - below).abs()).max((model - at).abs());
        i = j;
    }
    Ok(sup.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn support_examples() {
        let (a, b) = mp_support(1.0, 0.25).unwrap();
        assert_relative_eq!(a, 0.25, max_relative = 1e-12);
        assert_relative_eq!(b, 2.25, max_relative = 1e-12);

        let (a, b) = mp_support(1.0, 1e-12).unwrap();
        assert!((a - 1.0).abs() < 1e-5 && (b - 1.0).abs() < 1e-5);

        let (a, b) = mp_support(4.0, 1.0).unwrap();
        assert_eq!(a, 0.0);
        assert_relative_eq!(b, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn support_rejects_bad_parameters() {
        assert!(matches!(mp_support(0.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(mp_support(1.0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(mp_support(f64::NAN, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn density_examples() {
        let law = MarchenkoPasturLaw::new(1.0, 1.0).unwrap();
        let expected = 3f64.sqrt() / (6.0 * PI);
        assert_relative_eq!(law.density(3.0).unwrap(), expected, max_relative = 1e-12);
        assert!((law.density(3.0).unwrap() - 0.0919).abs() < 1e-4);

        let law = MarchenkoPasturLaw::new(1.0, 0.25).unwrap();
        assert_eq!(law.density(3.0).unwrap(), 0.0);
        assert!(law.density(-1.0).is_err());
    }

    #[test]
    fn atom_mass_examples() {
        assert_eq!(MarchenkoPasturLaw::new(1.0, 0.5).unwrap().atom_mass(), 0.0);
        assert_relative_eq!(MarchenkoPasturLaw::new(1.0, 2.0).unwrap().atom_mass(), 0.5);
        assert_eq!(MarchenkoPasturLaw::new(1.0, 1.0).unwrap().atom_mass(), 0.0);
    }

    #[test]
    fn cdf_edges_and_median() {
        let law = MarchenkoPasturLaw::new(2.0, 0.5).unwrap();
        assert_eq!(law.cdf(law.a()).unwrap(), 0.0);
        assert!((law.cdf(law.b()).unwrap() - 1.0).abs() < 1e-6);
        assert!((law.cdf(10.0 * law.b()).unwrap() - 1.0).abs() < 1e-6);

        let law = MarchenkoPasturLaw::new(1.0, 3.0).unwrap();
        assert_relative_eq!(law.cdf(law.a()).unwrap(), law.atom_mass());
        assert!((law.cdf(law.b()).unwrap() - 1.0).abs() < 1e-6);

        let law = MarchenkoPasturLaw::new(1.0, 1.0).unwrap();
        // s = 1: F(2) = 1/2 + 1/pi
        assert!((law.cdf(2.0).unwrap() - (0.5 + std::f64::consts::FRAC_1_PI)).abs() < 1e-8);
        assert!(law.cdf(-0.5).is_err());
    }

    #[test]
    fn esd_examples() {
        let esd = build_esd(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(esd.eigenvalues(), &[1.0, 2.0, 3.0]);

        let esd = build_esd(&[0.0, 0.0]).unwrap();
        assert_eq!(esd.cdf(0.0), 1.0);

        let esd = build_esd(&[-1e-12, 5.0]).unwrap();
        assert_eq!(esd.eigenvalues(), &[0.0, 5.0]);

        assert!(build_esd(&[]).is_err());
        assert!(build_esd(&[-1e-6, 1.0]).is_err());
    }

    #[test]
    fn ks_all_mass_at_upper_edge_is_one() {
        let law = MarchenkoPasturLaw::new(1.0, 0.25).unwrap();
        let esd = build_esd(&[law.b(); 20]).unwrap();
        let d = ks_distance(&esd, &law).unwrap();
        assert!(d > 0.999, "distance {d}");
    }
}
