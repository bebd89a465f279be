use jointrisk::num::special::{
    bivariate_normal_cdf, expit, logit, std_normal_cdf, std_normal_quantile,
};
use jointrisk::RngStream;

#[test]
fn expit_at_generating_linear_predictor() {
    // 40-digit evaluation of 1/(1+exp(1-ln 2))
    let oracle = 0.423_883_115_234_170_890_141_681_076_361_5;
    assert!((expit(-1.0 + 2f64.ln()) - oracle).abs() < 1e-15);
    assert_eq!(expit(0.0), 0.5);
    let tiny = expit(-745.0);
    assert!(tiny > 0.0 && tiny < 1e-300);
    assert_eq!(expit(745.0), 1.0);
}

#[test]
fn logit_inverts_expit() {
    assert_eq!(logit(0.5).unwrap(), 0.0);
    assert!((logit(expit(3.7)).unwrap() - 3.7).abs() < 1e-12);
    assert!(logit(0.0).is_err());
    assert!(logit(1.0).is_err());
    assert!(logit(f64::NAN).is_err());
}

#[test]
fn logit_round_trip_relative_error() {
    // p in [1e-10, 1 - 1e-10]
    let n = 2000;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let x = -23.0 + 46.0 * t;
        let p = expit(x);
        if !(1e-10..=1.0 - 1e-10).contains(&p) {
            continue;
        }
        let q = expit(logit(p).unwrap());
        assert!(((q - p) / p).abs() < 1e-12, "p={p}");
    }
}

#[test]
fn logit_of_expit_on_lower_half_line() {
    // Above 0, expit rounds 1 - p to the nearest 2^-53 and the identity in x
    // loses digits in proportion to 1/(1 - p); below 0 it is exact.
    for k in 0..=3000 {
        let x = -30.0 + 0.01 * k as f64;
        assert!((logit(expit(x)).unwrap() - x).abs() < 1e-12, "x={x}");
    }
}

#[test]
fn normal_cdf_reference_values() {
    assert_eq!(std_normal_cdf(0.0), 0.5);
    // 40-digit erf evaluation: 0.975000000903557...
    assert!((std_normal_cdf(1.959964) - 0.975).abs() < 1e-6);
    assert!((std_normal_cdf(1.959964) - 0.975_000_000_903_557_6).abs() < 1e-13);
    for k in 0..200 {
        let x = -8.0 + 0.08 * k as f64;
        assert!((std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))).abs() < 1e-14, "x={x}");
    }
}

#[test]
fn quantile_reference_and_round_trip() {
    assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
    // sqrt(2)·erfinv(0.95) = 1.959963984540054...
    assert!((std_normal_quantile(0.975).unwrap() - 1.959964).abs() < 1e-5);
    assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
    let mut worst = 0.0f64;
    for k in 1..=1000 {
        let p = k as f64 / 1001.0;
        worst = worst.max((std_normal_cdf(std_normal_quantile(p).unwrap()) - p).abs());
    }
    assert!(worst < 1e-10, "{worst}");
    assert!(std_normal_quantile(0.0).is_err());
    assert!(std_normal_quantile(1.0).is_err());
}

/// Conditional Monte Carlo with antithetic pairs:
/// P(Z1 ≤ a, Z2 ≤ b) = E[1{Z1 ≤ a} Φ((b − ρZ1)/√(1−ρ²))].
fn bvn_monte_carlo(a: f64, b: f64, rho: f64, draws: usize, rng: &mut RngStream) -> (f64, f64) {
    let s = (1.0 - rho * rho).sqrt();
    let term = |z: f64| if z <= a { std_normal_cdf((b - rho * z) / s) } else { 0.0 };
    let (mut sum, mut sq) = (0.0, 0.0);
    let pairs = draws / 2;
    for _ in 0..pairs {
        let z = rng.standard_normal();
        let v = 0.5 * (term(z) + term(-z));
        sum += v;
        sq += v * v;
    }
    let mean = sum / pairs as f64;
    let var = sq / pairs as f64 - mean * mean;
    (mean, (var / pairs as f64).sqrt())
}

#[test]
fn bivariate_cdf_matches_monte_carlo_at_reference_point() {
    let mut rng = RngStream::new(0x5eed);
    let (mc, se) = bvn_monte_carlo(0.3, -0.8, 0.6, 10_000_000, &mut rng);
    let v = bivariate_normal_cdf(0.3, -0.8, 0.6).unwrap();
    // exact se of this estimator by quadrature: 3.066e-5
    assert!((se - 3.066e-5).abs() < 2e-6, "se={se}");
    assert!((v - mc).abs() < 1e-4, "{v} vs {mc}");
    // adaptive 40-digit quadrature of the same single integral
    assert!((v - 0.192_310_683_170_542_9).abs() < 1e-9);
}

#[test]
fn bivariate_cdf_closed_forms() {
    assert!((bivariate_normal_cdf(0.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
    assert!((bivariate_normal_cdf(0.0, 0.0, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    let grid = [-3.1, -1.2, -0.4, 0.0, 0.7, 1.9, 2.8];
    for &a in &grid {
        assert!((bivariate_normal_cdf(a, f64::INFINITY, 0.3).unwrap() - std_normal_cdf(a)).abs() < 1e-9);
        for &b in &grid {
            let ind = bivariate_normal_cdf(a, b, 0.0).unwrap();
            assert!((ind - std_normal_cdf(a) * std_normal_cdf(b)).abs() < 1e-9);
            for &r in &[-0.9, -0.3, 0.4, 0.95] {
                let ab = bivariate_normal_cdf(a, b, r).unwrap();
                let ba = bivariate_normal_cdf(b, a, r).unwrap();
                assert!((ab - ba).abs() < 1e-12);
            }
        }
    }
    for &r in &[-0.99, -0.5, 0.0, 0.25, 0.75, 0.99] {
        let v = bivariate_normal_cdf(0.0, 0.0, r).unwrap();
        let exact = 0.25 + f64::asin(r) / (2.0 * std::f64::consts::PI);
        assert!((v - exact).abs() < 1e-9, "rho={r}");
    }
    assert!(bivariate_normal_cdf(0.0, 0.0, 1.01).is_err());
}

#[test]
fn bivariate_cdf_is_monotone() {
    let mut prev = 0.0;
    for k in 0..=40 {
        let r = -0.99 + 1.98 * k as f64 / 40.0;
        let v = bivariate_normal_cdf(0.0, 0.0, r).unwrap();
        assert!(v >= prev - 1e-15);
        prev = v;
    }
    for &r in &[-0.8, 0.0, 0.6] {
        let mut prev_a = 0.0;
        for k in 0..=60 {
            let a = -4.0 + 8.0 * k as f64 / 60.0;
            let v = bivariate_normal_cdf(a, 0.5, r).unwrap();
            assert!(v >= prev_a - 1e-15, "a={a} rho={r}");
            prev_a = v;
        }
    }
}
