use jointrisk::datagen::true_joint_risk;
use jointrisk::glm::softmax3;
use jointrisk::metrics::{auc, marginal_citl};
use jointrisk::models::probit::{
    ChainDiagnostics, ProbitDraw, ProbitPosterior, ProbitPrediction, ProbitSummary,
};
use jointrisk::models::stacked::{StackedModel, StackedStage2};
use jointrisk::models::{
    GumbelMvlModel, MultinomialModel, PccModel, UnivariateLogisticModel, UnivariatePair,
};
use jointrisk::num::special::{bivariate_normal_cdf, expit, std_normal_cdf};
use jointrisk::num::truncnorm::sample_truncated_normal;
use jointrisk::{FittedModel, Method, RngStream};
use proptest::prelude::*;

fn uni(p: &[f64]) -> UnivariateLogisticModel {
    UnivariateLogisticModel { intercept: p[0], coefficients: p[1..].to_vec() }
}

/// A model of the given kind whose parameters are read off `p` (at least 24 values).
fn build(method: Method, p: &[f64], rho: f64) -> FittedModel {
    match method {
        Method::Univariate => FittedModel::Univariate(UnivariatePair {
            outcome1: uni(&p[0..3]),
            outcome2: uni(&p[3..6]),
        }),
        Method::Sr => FittedModel::Sr(StackedModel {
            stage1: [uni(&p[0..3]), uni(&p[3..6])],
            stage2: [
                StackedStage2 { intercept: p[6], weights: [p[7], p[8]], direct: p[9..11].to_vec(), lambda: 0.1 },
                StackedStage2 { intercept: p[11], weights: [p[12], p[13]], direct: vec![], lambda: 0.0 },
            ],
        }),
        Method::Pcc => FittedModel::Pcc(PccModel {
            perm1_marginal: uni(&p[0..3]),
            perm1_conditional: uni(&p[3..7]),
            perm2_marginal: uni(&p[7..10]),
            perm2_conditional: uni(&p[10..14]),
        }),
        Method::Mlr => FittedModel::Mlr(MultinomialModel {
            coefficients: [p[0..3].to_vec(), p[3..6].to_vec(), p[6..9].to_vec()],
        }),
        Method::Mlm => FittedModel::Mlm(GumbelMvlModel {
            beta1: p[0..3].to_vec(),
            beta2: p[3..6].to_vec(),
            rho,
            diagnostics: Default::default(),
        }),
        Method::Mpm => {
            let draws: Vec<ProbitDraw> = (0..4)
                .map(|d| ProbitDraw {
                    beta1: p[6 + 3 * d..9 + 3 * d].to_vec(),
                    beta2: p[3 * d..3 + 3 * d].to_vec(),
                    rho: rho * (1.0 - 0.1 * d as f64),
                })
                .collect();
            FittedModel::Mpm {
                posterior: ProbitPosterior {
                    draws,
                    summary: ProbitSummary {
                        beta1_mean: p[0..3].to_vec(),
                        beta2_mean: p[3..6].to_vec(),
                        rho_mean: rho,
                        beta1_sd: vec![0.1; 3],
                        beta2_sd: vec![0.1; 3],
                        rho_sd: 0.1,
                    },
                    diagnostics: ChainDiagnostics { rho_acceptance_rate: 0.3, retained: 4, burn_in: 0 },
                },
                prediction: if p[23] > 0.0 {
                    ProbitPrediction::DrawAverage
                } else {
                    ProbitPrediction::PosteriorMean
                },
            }
        }
    }
}

fn method_strategy() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn predictions_lie_on_the_simplex(
        method in method_strategy(),
        p in prop::collection::vec(-3.0f64..3.0, 24),
        rho in -0.99f64..0.99,
        x in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        let m = build(method, &p, rho);
        let j = m.predict(&x);
        prop_assert!(j.is_valid(1e-12), "{method}: {j:?}");
        let (p1, p2) = (j.marginal1(), j.marginal2());
        prop_assert!((0.0..=1.0).contains(&p1) && (0.0..=1.0).contains(&p2));
    }

    #[test]
    fn independent_methods_reproduce_their_marginals(
        p in prop::collection::vec(-3.0f64..3.0, 24),
        x in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        if let FittedModel::Univariate(pair) = build(Method::Univariate, &p, 0.0) {
            let j = pair.predict(&x);
            prop_assert!((j.marginal1() - pair.outcome1.predict(&x)).abs() < 1e-12);
            prop_assert!((j.marginal2() - pair.outcome2.predict(&x)).abs() < 1e-12);
        }
        if let FittedModel::Sr(sr) = build(Method::Sr, &p, 0.0) {
            let j = FittedModel::Sr(sr.clone()).predict(&x);
            let (a, b) = sr.marginals(&x);
            prop_assert!((j.marginal1() - a).abs() < 1e-12 && (j.marginal2() - b).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_marginal_is_the_first_link(
        p in prop::collection::vec(-3.0f64..3.0, 24),
        x in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        if let FittedModel::Pcc(m) = build(Method::Pcc, &p, 0.0) {
            let j = m.permutation1(&x);
            prop_assert!((j.marginal1() - m.perm1_marginal.predict(&x)).abs() < 1e-12);
            let j = m.permutation2(&x);
            prop_assert!((j.marginal2() - m.perm2_marginal.predict(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn latent_models_keep_their_link_marginals(
        p in prop::collection::vec(-2.0f64..2.0, 24),
        rho in -0.95f64..0.95,
        x in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let lp = |b: &[f64]| b[0] + b[1] * x[0] + b[2] * x[1];
        if let FittedModel::Mpm { posterior, .. } = build(Method::Mpm, &p, rho) {
            let j = jointrisk::models::predict_probit(&posterior, &x);
            prop_assert!((j.marginal1() - std_normal_cdf(lp(&p[0..3]))).abs() < 1e-8);
            prop_assert!((j.marginal2() - std_normal_cdf(lp(&p[3..6]))).abs() < 1e-8);
        }
        if let FittedModel::Mlm(m) = build(Method::Mlm, &p, rho) {
            let (j, clamped) = jointrisk::models::predict_mvl(&m, &x);
            if !clamped {
                prop_assert!((j.marginal1() - expit(lp(&p[0..3]))).abs() < 1e-12);
                prop_assert!((j.marginal2() - expit(lp(&p[3..6]))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn true_risk_is_a_distribution_with_logistic_marginals(
        lp1 in -8.0f64..8.0,
        lp2 in -8.0f64..8.0,
        rho in -1.0f64..=1.0,
    ) {
        let j = true_joint_risk(lp1, lp2, rho);
        prop_assert!(j.is_valid(1e-12), "{j:?}");
        prop_assert!((j.marginal1() - expit(lp1)).abs() < 1e-12);
        prop_assert!((j.marginal2() - expit(lp2)).abs() < 1e-12);
    }

    #[test]
    fn bivariate_cdf_respects_frechet_bounds(
        a in -6.0f64..6.0,
        b in -6.0f64..6.0,
        rho in -0.999f64..0.999,
        da in 0.0f64..2.0,
    ) {
        let v = bivariate_normal_cdf(a, b, rho).unwrap();
        let (fa, fb) = (std_normal_cdf(a), std_normal_cdf(b));
        prop_assert!(v >= (fa + fb - 1.0).max(0.0) - 1e-12);
        prop_assert!(v <= fa.min(fb) + 1e-12);
        prop_assert!(bivariate_normal_cdf(a + da, b, rho).unwrap() >= v - 1e-12);
    }

    #[test]
    fn softmax_is_a_distribution(eta in prop::array::uniform3(-700.0f64..700.0)) {
        let (p, lse) = softmax3(eta);
        let p00 = 1.0 - p.iter().sum::<f64>();
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(p00 >= -1e-15);
        prop_assert!(lse >= eta.iter().fold(0.0f64, |m, &e| m.max(e)));
        let shifted = softmax3([eta[0] - 1.0, eta[1] - 1.0, eta[2] - 1.0]).0;
        // lowering every non-reference predictor by one scales each ratio by e
        for k in 0..3 {
            if p[k] > 1e-300 && shifted[k] > 1e-300 && p[(k + 1) % 3] > 1e-300 {
                let r0 = p[k] / p[(k + 1) % 3];
                let r1 = shifted[k] / shifted[(k + 1) % 3];
                prop_assert!((r0 - r1).abs() <= 1e-9 * r0);
            }
        }
    }

    #[test]
    fn truncated_normal_stays_in_bounds(
        mean in -3.0f64..3.0,
        sd in 0.1f64..3.0,
        lo in -12.0f64..12.0,
        width in 1e-3f64..6.0,
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed);
        for _ in 0..20 {
            let v = sample_truncated_normal(mean, sd, lo, lo + width, &mut rng).unwrap();
            prop_assert!(v > lo && v < lo + width, "{v} not in ({lo}, {})", lo + width);
        }
        let v = sample_truncated_normal(mean, sd, lo, f64::INFINITY, &mut rng).unwrap();
        prop_assert!(v > lo);
        let v = sample_truncated_normal(mean, sd, f64::NEG_INFINITY, lo, &mut rng).unwrap();
        prop_assert!(v < lo);
    }

    #[test]
    fn streams_are_pure_functions_of_their_labels(seed in any::<u64>(), k in 0u64..1000) {
        let a = RngStream::new(seed).child("dev-data").child_indexed("iteration", k);
        let b = RngStream::new(seed).child("dev-data").child_indexed("iteration", k);
        let (mut a, mut b) = (a, b);
        for _ in 0..8 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(seed).child("val-data").child_indexed("iteration", k);
        let mut d = RngStream::new(seed).child("dev-data").child_indexed("iteration", k);
        prop_assert_ne!(c.next_u64(), d.next_u64());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_ignores_increasing_transforms(
        scores in prop::collection::vec(0.001f64..0.999, 40),
        labels in prop::collection::vec(any::<bool>(), 40),
        scale in 0.1f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        prop_assume!(labels.iter().any(|&v| v) && labels.iter().any(|&v| !v));
        let base = auc(&scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));
        let logits: Vec<f64> = scores.iter().map(|p| (p / (1.0 - p)).ln()).collect();
        let affine: Vec<f64> = scores.iter().map(|s| scale * s + shift).collect();
        prop_assert_eq!(auc(&logits, &labels).unwrap(), base);
        prop_assert_eq!(auc(&affine, &labels).unwrap(), base);
    }

    #[test]
    fn recalibrated_predictions_have_zero_citl(
        lps in prop::collection::vec(-3.0f64..3.0, 200),
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed);
        let pred: Vec<f64> = lps.iter().map(|&v| expit(v)).collect();
        let y: Vec<bool> = pred.iter().map(|&p| rng.bernoulli(expit(p.ln() + 0.5))).collect();
        prop_assume!(y.iter().any(|&v| v) && y.iter().any(|&v| !v));
        let alpha = marginal_citl(&pred, &y).unwrap();
        let recal: Vec<f64> = lps.iter().map(|&v| expit(v + alpha)).collect();
        prop_assert!(marginal_citl(&recal, &y).unwrap().abs() < 1e-7);
        let observed = y.iter().filter(|&&v| v).count() as f64;
        prop_assert!((recal.iter().sum::<f64>() - observed).abs() < 1e-6);
    }
}
