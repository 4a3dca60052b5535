//! Monte Carlo checks of the Gaussian isoperimetric bound and of the stretch
//! tail of the sign-matrix sampler.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{fill_gaussian, SignMatrixSampler};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoReport {
    pub delta: f64,
    pub rho: f64,
    pub threshold: f64,
    pub samples: usize,
    pub violations: usize,
    pub violation_rate: f64,
}

/// Estimates the probability, over `u ∈ A`, that a `ρ`-correlated copy of
/// `u` lands in `A` with probability below `(εδ)^{1/(1-ρ)}`, where `A` is
/// the halfspace `{u₁ ≥ Φ⁻¹(1-δ)}` of Gaussian measure `δ`.
///
/// Only the first coordinate matters, so points of `A` are drawn by
/// rejection from a standard normal and the inner probability is exact:
/// `1 - Φ((θ - ρu₁)/√(1-ρ²))`.
pub fn validate_isoperimetry<R: Rng + ?Sized>(
    epsilon: f64,
    delta: f64,
    rho: f64,
    samples: usize,
    rng: &mut R,
) -> Result<IsoReport> {
    if !(delta > 0.0 && delta <= 1.0) || !(0.0..1.0).contains(&rho) || !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!(
            "need 0 < δ <= 1, 0 <= ρ < 1, 0 < ε <= 1; got δ = {delta}, ρ = {rho}, ε = {epsilon}"
        )));
    }
    let threshold = (epsilon * delta).powf(1.0 / (1.0 - rho));
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut report = IsoReport { delta, rho, threshold, samples, violations: 0, violation_rate: 0.0 };
    if delta >= 1.0 {
        return Ok(report);
    }
    let theta = normal.inverse_cdf(1.0 - delta);
    let spread = (1.0 - rho * rho).sqrt();
    let mut buf = [0.0; 2];
    let mut drawn = 0;
    while drawn < samples {
        fill_gaussian(rng, &mut buf);
        for &u1 in &buf {
            if u1 < theta || drawn == samples {
                continue;
            }
            drawn += 1;
            let inner = normal.sf((theta - rho * u1) / spread);
            if inner < threshold {
                report.violations += 1;
            }
        }
    }
    report.violation_rate = report.violations as f64 / samples.max(1) as f64;
    Ok(report)
}

/// Fraction of draws where `v·(û - ρu)` exceeds `t`, for `u` a sign-matrix
/// direction and `û` its `ρ`-correlated copy. For a Gaussian pair this
/// quantity is normal with variance `(1-ρ²)‖v‖²`.
pub fn pm1_stretch_tail<R: Rng + ?Sized>(
    v: &[f64],
    k: usize,
    rho: f64,
    t: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut hits = 0usize;
    for _ in 0..samples {
        let m = SignMatrixSampler::new(v.len(), k, rng)?;
        let c = m.correlated(rho, rng)?;
        let (u, uh) = (m.direction(), c.direction());
        let x: f64 = v.iter().zip(u.iter().zip(&uh)).map(|(vi, (a, b))| vi * (b - rho * a)).sum();
        if x > t {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::rng_from;

    #[test]
    fn independent_copies_never_violate() {
        let r = validate_isoperimetry(0.5, 0.1, 0.0, 1000, &mut rng_from(1)).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn violation_rate_is_small_for_chain_correlation() {
        let r = validate_isoperimetry(0.25, 0.1, 0.5, 20_000, &mut rng_from(2)).unwrap();
        assert!(r.violation_rate <= 0.01, "{}", r.violation_rate);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(validate_isoperimetry(0.25, 0.0, 0.5, 10, &mut rng_from(3)).is_err());
        assert!(validate_isoperimetry(0.25, 0.1, 1.0, 10, &mut rng_from(3)).is_err());
    }

    #[test]
    fn stretch_tail_is_near_gaussian() {
        let v = vec![0.5; 4];
        let rho = 0.5;
        let t = 1.0;
        let p = pm1_stretch_tail(&v, 36, rho, t, 20_000, &mut rng_from(4)).unwrap();
        let sd = (1.0 - rho * rho).sqrt();
        let gauss = Normal::new(0.0, sd).unwrap().sf(t);
        assert!((p - gauss).abs() < 0.02, "{p} vs {gauss}");
    }
}
