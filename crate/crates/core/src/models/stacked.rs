//! Two-stage stacked regression.
//!
//! Stage 1 fits an unpenalized logistic model per outcome. Stage 2 refits
//! each outcome by lasso on `[f̂1(x), f̂2(x), x]`, where `f̂j` are the stage-1
//! linear predictors, so each outcome can borrow strength from the other.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::univariate::{fit_named, UnivariateLogisticModel};
use crate::error::Result;
use crate::num::lasso::{cv_lambda_path, lambda_grid, lambda_max, lasso_logistic};
use crate::num::rng::RngStream;
use crate::num::special::expit;
use crate::risk::JointRisk;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPolicy {
    CrossValidated {
        folds: usize,
        grid_len: usize,
        /// Smallest grid value as a fraction of `lambda_max`.
        min_ratio: f64,
    },
    Fixed(f64),
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::CrossValidated {
            folds: 10,
            grid_len: 50,
            min_ratio: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackedOptions {
    pub lambda: LambdaPolicy,
    /// Include the raw covariates in stage 2.
    pub direct_effects: bool,
}

impl Default for StackedOptions {
    fn default() -> Self {
        Self {
            lambda: LambdaPolicy::default(),
            direct_effects: true,
        }
    }
}

/// `logit P = intercept + weights·(f̂1, f̂2) + directᵀx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedStage2 {
    pub intercept: f64,
    pub weights: [f64; 2],
    /// Empty when direct effects were excluded.
    pub direct: Vec<f64>,
    pub lambda: f64,
}

impl StackedStage2 {
    fn linear_predictor(&self, f: [f64; 2], x: &[f64]) -> f64 {
        self.intercept
            + self.weights[0] * f[0]
            + self.weights[1] * f[1]
            + self.direct.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub stage1: [UnivariateLogisticModel; 2],
    pub stage2: [StackedStage2; 2],
}

impl StackedModel {
    fn stage1_predictors(&self, x: &[f64]) -> [f64; 2] {
        [
            self.stage1[0].linear_predictor(x),
            self.stage1[1].linear_predictor(x),
        ]
    }

    /// Stage-2 linear predictors for both outcomes.
    pub fn linear_predictors(&self, x: &[f64]) -> (f64, f64) {
        let f = self.stage1_predictors(x);
        (
            self.stage2[0].linear_predictor(f, x),
            self.stage2[1].linear_predictor(f, x),
        )
    }

    pub fn marginals(&self, x: &[f64]) -> (f64, f64) {
        let (a, b) = self.linear_predictors(x);
        (expit(a), expit(b))
    }

    pub fn lambdas(&self) -> (f64, f64) {
        (self.stage2[0].lambda, self.stage2[1].lambda)
    }
}

pub fn fit_stacked(
    x: &DMatrix<f64>,
    y1: &[bool],
    y2: &[bool],
    lambda_policy: LambdaPolicy,
    rng: &RngStream,
) -> Result<StackedModel> {
    fit_stacked_with(
        x,
        y1,
        y2,
        &StackedOptions {
            lambda: lambda_policy,
            ..Default::default()
        },
        rng,
    )
}

pub fn fit_stacked_with(
    x: &DMatrix<f64>,
    y1: &[bool],
    y2: &[bool],
    opts: &StackedOptions,
    rng: &RngStream,
) -> Result<StackedModel> {
    let m1 = fit_named(x, y1, "y1")?;
    let m2 = fit_named(x, y2, "y2")?;
    let n = x.nrows();
    let extra = if opts.direct_effects { x.ncols() } else { 0 };
    let mut design = DMatrix::zeros(n, 2 + extra);
    for i in 0..n {
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        design[(i, 0)] = m1.linear_predictor(&row);
        design[(i, 1)] = m2.linear_predictor(&row);
        for j in 0..extra {
            design[(i, 2 + j)] = row[j];
        }
    }
    let stage2_1 = fit_stage2(&design, y1, opts.lambda, &mut rng.child("outcome1"))?;
    let stage2_2 = fit_stage2(&design, y2, opts.lambda, &mut rng.child("outcome2"))?;
    Ok(StackedModel {
        stage1: [m1, m2],
        stage2: [stage2_1, stage2_2],
    })
}

fn fit_stage2(
    design: &DMatrix<f64>,
    y: &[bool],
    policy: LambdaPolicy,
    rng: &mut RngStream,
) -> Result<StackedStage2> {
    let lambda = match policy {
        LambdaPolicy::Fixed(l) => l,
        LambdaPolicy::CrossValidated { folds, grid_len, min_ratio } => {
            let grid = lambda_grid(lambda_max(design, y), min_ratio, grid_len);
            cv_lambda_path(design, y, &[], folds, &grid, rng)?.lambda
        }
    };
    let fit = lasso_logistic(design, y, &[], lambda)?;
    Ok(StackedStage2 {
        intercept: fit.intercept,
        weights: [fit.coefficients[0], fit.coefficients[1]],
        direct: fit.coefficients[2..].to_vec(),
        lambda,
    })
}

/// Product-form joint risk from the stage-2 marginals.
pub fn predict_stacked_joint(m: &StackedModel, x: &[f64]) -> JointRisk {
    let (p1, p2) = m.marginals(x);
    JointRisk::from_independent(p1, p2)
}
