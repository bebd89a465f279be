use jointrisk::datagen::generate_dataset;
use jointrisk::glm::fit_logistic;
use jointrisk::models::stacked::{fit_stacked_with, StackedOptions};
use jointrisk::models::{
    fit_stacked, fit_univariate, predict_stacked_joint, predict_univariate_joint, LambdaPolicy,
    UnivariateLogisticModel, UnivariatePair,
};
use jointrisk::{GenConfig, JointRisk, RngStream, SyntheticDataset};
use nalgebra::DMatrix;

fn dataset(n: usize, rho: f64, seed: u64) -> SyntheticDataset {
    generate_dataset(&GenConfig::base(n, rho), &mut RngStream::new(seed)).unwrap()
}

#[test]
fn univariate_recovers_generating_coefficients() {
    let d = dataset(50_000, 0.5, 1).data;
    let m1 = fit_univariate(&d.x, &d.y1).unwrap();
    let m2 = fit_univariate(&d.x, &d.y2).unwrap();
    let truth1 = [-1.0, 2f64.ln(), 0.0];
    let truth2 = [-1.5, 0.0, 3f64.ln()];
    let got1 = [m1.intercept, m1.coefficients[0], m1.coefficients[1]];
    let got2 = [m2.intercept, m2.coefficients[0], m2.coefficients[1]];
    for k in 0..3 {
        assert!((got1[k] - truth1[k]).abs() < 0.05, "beta1[{k}] = {}", got1[k]);
        assert!((got2[k] - truth2[k]).abs() < 0.05, "beta2[{k}] = {}", got2[k]);
    }
}

#[test]
fn univariate_fit_ignores_row_order() {
    let d = dataset(3000, 0.25, 2).data;
    let mut idx: Vec<usize> = (0..d.n()).collect();
    RngStream::new(3).shuffle(&mut idx);
    let s = d.subset(&idx);
    let a = fit_univariate(&d.x, &d.y1).unwrap();
    let b = fit_univariate(&s.x, &s.y1).unwrap();
    assert!((a.intercept - b.intercept).abs() < 1e-10);
    for (u, v) in a.coefficients.iter().zip(&b.coefficients) {
        assert!((u - v).abs() < 1e-10);
    }
}

#[test]
fn univariate_rejects_single_class_and_tiny_samples() {
    let x = DMatrix::from_fn(20, 2, |i, j| (i * 3 + j) as f64 / 7.0);
    assert!(fit_univariate(&x, &[false; 20]).is_err());
    let small = DMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
    assert!(fit_univariate(&small, &[true, false, true]).is_err());
}

#[test]
fn product_form_examples() {
    let zero = UnivariateLogisticModel { intercept: 0.0, coefficients: vec![0.0, 0.0] };
    let j = predict_univariate_joint(&zero, &zero, &[0.3, -1.0]);
    assert_eq!(j, JointRisk::new(0.25, 0.25, 0.25, 0.25));

    let logit = |p: f64| (p / (1.0 - p)).ln();
    let m1 = UnivariateLogisticModel { intercept: logit(0.29), coefficients: vec![] };
    let m2 = UnivariateLogisticModel { intercept: logit(0.23), coefficients: vec![] };
    let j = predict_univariate_joint(&m1, &m2, &[]);
    assert!((j.p11 - 0.0667).abs() < 1e-12);
    assert!((j.sum() - 1.0).abs() < 1e-15);
}

#[test]
fn independent_methods_factor_exactly() {
    let d = dataset(4000, 0.75, 4).data;
    let pair = UnivariatePair::fit(&d.x, &d.y1, &d.y2).unwrap();
    let sr = fit_stacked(&d.x, &d.y1, &d.y2, LambdaPolicy::Fixed(1e-3), &RngStream::new(5)).unwrap();
    let mut rng = RngStream::new(6);
    for _ in 0..500 {
        let x = [2.0 * rng.standard_normal(), 2.0 * rng.standard_normal()];
        for j in [pair.predict(&x), predict_stacked_joint(&sr, &x)] {
            assert!((j.p11 * j.p00 - j.p10 * j.p01).abs() < 1e-12);
            assert!((j.sum() - 1.0).abs() < 1e-12);
        }
        let (a, _) = sr.linear_predictors(&x);
        let j = predict_stacked_joint(&sr, &x);
        assert!((j.marginal1() - 1.0 / (1.0 + (-a).exp())).abs() < 1e-12);
    }
}

#[test]
fn stacked_cross_weight_vanishes_without_residual_dependence() {
    let d = dataset(50_000, 0.0, 7).data;
    let m = fit_stacked(&d.x, &d.y1, &d.y2, LambdaPolicy::default(), &RngStream::new(8)).unwrap();
    assert!(m.stage2[0].weights[1].abs() < 0.05, "{:?}", m.stage2[0]);
    assert!(m.stage2[1].weights[0].abs() < 0.05, "{:?}", m.stage2[1]);
}

#[test]
fn stacked_with_huge_penalty_predicts_event_rates() {
    let d = dataset(3000, 0.5, 9).data;
    let m = fit_stacked(&d.x, &d.y1, &d.y2, LambdaPolicy::Fixed(1e6), &RngStream::new(10)).unwrap();
    let r1 = d.y1.iter().filter(|&&v| v).count() as f64 / d.n() as f64;
    let r2 = d.y2.iter().filter(|&&v| v).count() as f64 / d.n() as f64;
    for x in [[0.0, 0.0], [1.5, -2.0], [-3.0, 0.7]] {
        let (p1, p2) = m.marginals(&x);
        assert!((p1 - r1).abs() < 1e-6 && (p2 - r2).abs() < 1e-6, "{p1} {p2}");
    }
}

#[test]
fn unpenalized_stacking_without_direct_effects_is_a_logistic_fit() {
    let d = dataset(3000, 0.5, 11).data;
    let opts = StackedOptions { lambda: LambdaPolicy::Fixed(0.0), direct_effects: false };
    let m = fit_stacked_with(&d.x, &d.y1, &d.y2, &opts, &RngStream::new(12)).unwrap();
    let design = DMatrix::from_fn(d.n(), 3, |i, j| match j {
        0 => 1.0,
        k => m.stage1[k - 1].linear_predictor(&d.row(i)),
    });
    for (k, y) in [&d.y1, &d.y2].into_iter().enumerate() {
        let (theta, _) = fit_logistic(&design, y, None, "y").unwrap();
        let s = &m.stage2[k];
        assert!(s.direct.is_empty());
        assert!((s.intercept - theta[0]).abs() < 1e-5, "{} vs {}", s.intercept, theta[0]);
        assert!((s.weights[0] - theta[1]).abs() < 1e-5);
        assert!((s.weights[1] - theta[2]).abs() < 1e-5);
    }
}

#[test]
fn stacked_fit_is_deterministic_given_stream() {
    let d = dataset(2000, 0.5, 13).data;
    let a = fit_stacked(&d.x, &d.y1, &d.y2, LambdaPolicy::default(), &RngStream::new(14)).unwrap();
    let b = fit_stacked(&d.x, &d.y1, &d.y2, LambdaPolicy::default(), &RngStream::new(14)).unwrap();
    assert_eq!(a, b);
}
