//! Sampling from a normal distribution restricted to an interval.
//!
//! Central regions use the inverse-CDF method, evaluated on whichever tail
//! keeps full precision. When the whole interval lies more than
//! [`TAIL_THRESHOLD`] standard deviations from the mean, Robert's (1995)
//! exponential-proposal rejection sampler takes over (or a uniform proposal
//! when the interval is very narrow), so far tails never loop forever.

use super::rng::RngStream;
use super::special::{quantile_unchecked, std_normal_cdf};
use crate::error::{Error, Result};

pub const TAIL_THRESHOLD: f64 = 4.0;

/// Draw from `N(mean, sd²)` truncated to `(lower, upper)`.
///
/// `lower` may be `-∞` and `upper` may be `+∞`.
pub fn sample_truncated_normal(
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
        return Err(Error::Domain(format!(
            "truncated normal needs finite mean and positive sd, got ({mean}, {sd})"
        )));
    }
    if !(lower < upper) {
        return Err(Error::Domain(format!(
            "truncation bounds must satisfy lower < upper, got ({lower}, {upper})"
        )));
    }
    let a = (lower - mean) / sd;
    let b = (upper - mean) / sd;
    Ok(mean + sd * standard_truncated(a, b, rng))
}

/// Standard normal truncated to `(a, b)`; callers guarantee `a < b`.
pub(crate) fn standard_truncated(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    if a >= TAIL_THRESHOLD {
        return right_tail(a, b, rng);
    }
    if b <= -TAIL_THRESHOLD {
        return -right_tail(-b, -a, rng);
    }
    let u = rng.uniform_open();
    let z = if a >= 0.0 {
        // both limits in the right half: invert the upper-tail probability
        let (pa, pb) = (std_normal_cdf(-a), std_normal_cdf(-b));
        -quantile_unchecked(pb + u * (pa - pb))
    } else {
        let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
        quantile_unchecked(pa + u * (pb - pa))
    };
    z.clamp(a, b)
}

/// Standard normal restricted to `(a, ∞)` by pure rejection: plain normal
/// proposals when `a < 0` (acceptance above one half), otherwise Robert's
/// exponential proposal. Cheaper than inversion when called in a hot loop.
#[inline]
pub(crate) fn standard_lower_truncated(a: f64, rng: &mut RngStream) -> f64 {
    if a < 0.0 {
        loop {
            let z = rng.standard_normal();
            if z > a {
                return z;
            }
        }
    }
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let z = a + rng.standard_exponential() / lambda;
        let d = z - lambda;
        if rng.uniform_open() <= (-0.5 * d * d).exp() {
            return z;
        }
    }
}

/// Rejection sampler for `(a, b)` with `a ≥ TAIL_THRESHOLD > 0`.
fn right_tail(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    if lambda * (b - a) < 1.0 {
        // narrow interval: the density is decreasing on it, bounded by its value at a
        loop {
            let z = a + (b - a) * rng.uniform_open();
            if rng.uniform_open() <= (0.5 * (a * a - z * z)).exp() {
                return z;
            }
        }
    }
    loop {
        let z = a + rng.standard_exponential() / lambda;
        if z >= b {
            continue;
        }
        let d = z - lambda;
        if rng.uniform_open() <= (-0.5 * d * d).exp() {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::special::std_normal_pdf;

    /// Mean and variance of the standard normal truncated to (a, b): closed
    /// form for half-infinite intervals, quadrature for finite ones (the
    /// closed-form variance cancels catastrophically on narrow intervals).
    fn moments(a: f64, b: f64) -> (f64, f64) {
        if a.is_finite() && b.is_finite() {
            let (x, w) = crate::num::special::gauss_legendre(64);
            let c = if a > 0.0 { a } else if b < 0.0 { b } else { 0.0 };
            let (h, mid) = (0.5 * (b - a), 0.5 * (a + b));
            let nodes: Vec<(f64, f64)> = x
                .iter()
                .zip(&w)
                .map(|(&t, &wt)| {
                    let z = mid + h * t;
                    (z, wt * (-0.5 * (z * z - c * c)).exp())
                })
                .collect();
            let mass: f64 = nodes.iter().map(|n| n.1).sum();
            let mean = nodes.iter().map(|(z, d)| z * d).sum::<f64>() / mass;
            let var = nodes.iter().map(|(z, d)| (z - mean).powi(2) * d).sum::<f64>() / mass;
            return (mean, var);
        }
        let z = if b == f64::INFINITY {
            std_normal_cdf(-a)
        } else {
            std_normal_cdf(b) - std_normal_cdf(a)
        };
        let (pa, pb) = (std_normal_pdf(a), std_normal_pdf(b));
        let apa = if a.is_finite() { a * pa } else { 0.0 };
        let bpb = if b.is_finite() { b * pb } else { 0.0 };
        let mean = (pa - pb) / z;
        let var = 1.0 + (apa - bpb) / z - mean * mean;
        (mean, var)
    }

    fn check(mean: f64, sd: f64, lo: f64, hi: f64, n: usize, seed: u64) {
        let mut rng = RngStream::new(seed);
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal(mean, sd, lo, hi, &mut rng).unwrap())
            .collect();
        assert!(draws.iter().all(|&x| x > lo && x < hi));
        let m = draws.iter().sum::<f64>() / n as f64;
        let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let (sm, sv) = moments((lo - mean) / sd, (hi - mean) / sd);
        let (em, ev) = (mean + sd * sm, sd * sd * sv);
        let se_mean = (ev / n as f64).sqrt();
        // var of the sample variance ≈ (μ4 − σ⁴)/n
        let m4 = draws.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((m4 - v * v) / n as f64).sqrt();
        assert!((m - em).abs() < 3.0 * se_mean, "mean {m} vs {em} ({lo},{hi})");
        assert!((v - ev).abs() < 3.0 * se_var.max(1e-12), "var {v} vs {ev} ({lo},{hi})");
    }

    #[test]
    fn half_normal_mean() {
        let mut rng = RngStream::new(11);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| sample_truncated_normal(0.0, 1.0, 0.0, f64::INFINITY, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean - expected).abs() < 0.003, "{mean}");
    }

    #[test]
    fn moments_match_across_regions() {
        let inf = f64::INFINITY;
        check(0.0, 1.0, 0.0, inf, 1_000_000, 1);
        check(0.0, 1.0, -inf, inf, 1_000_000, 2);
        check(1.5, 2.0, -1.0, 0.5, 1_000_000, 3);
        check(0.0, 1.0, 5.0, 6.0, 1_000_000, 4);
        check(0.0, 1.0, -inf, -4.5, 1_000_000, 5);
        check(-2.0, 0.5, 0.0, inf, 1_000_000, 6);
        check(0.0, 1.0, 2.0, 2.05, 200_000, 7);
        check(0.0, 1.0, 6.0, 6.01, 200_000, 8);
    }

    #[test]
    fn one_sided_rejection_matches_moments() {
        for (k, &a) in [-3.0, -0.7, 0.0, 0.4, 2.5, 7.0].iter().enumerate() {
            let mut rng = RngStream::new(100 + k as u64);
            let n = 500_000;
            let draws: Vec<f64> = (0..n).map(|_| standard_lower_truncated(a, &mut rng)).collect();
            assert!(draws.iter().all(|&z| z > a));
            let m = draws.iter().sum::<f64>() / n as f64;
            let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let (em, ev) = moments(a, f64::INFINITY);
            assert!((m - em).abs() < 3.0 * (ev / n as f64).sqrt(), "a={a}: mean {m} vs {em}");
            let m4 = draws.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
            assert!((v - ev).abs() < 3.0 * ((m4 - v * v) / n as f64).sqrt(), "a={a}: var {v} vs {ev}");
        }
    }

    #[test]
    fn far_tail_terminates_within_bounds() {
        let mut rng = RngStream::new(9);
        for _ in 0..10_000 {
            let x = sample_truncated_normal(0.0, 1.0, 5.0, 6.0, &mut rng).unwrap();
            assert!(x > 5.0 && x < 6.0);
            let y = sample_truncated_normal(0.0, 1.0, 30.0, f64::INFINITY, &mut rng).unwrap();
            assert!(y > 30.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = RngStream::new(0);
        assert!(sample_truncated_normal(0.0, 0.0, 0.0, 1.0, &mut rng).is_err());
        assert!(sample_truncated_normal(0.0, 1.0, 1.0, 1.0, &mut rng).is_err());
        assert!(sample_truncated_normal(0.0, 1.0, 2.0, 1.0, &mut rng).is_err());
    }
}
