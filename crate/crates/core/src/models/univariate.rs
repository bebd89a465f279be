//! Separate logistic regressions for each outcome.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{fit_logistic, with_intercept};
use crate::num::special::expit;
use crate::risk::JointRisk;

/// `logit P(y = 1 | x) = intercept + coefficientsᵀx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateLogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl UnivariateLogisticModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        expit(self.linear_predictor(x))
    }

    pub(crate) fn from_parameters(theta: &[f64]) -> Self {
        Self {
            intercept: theta[0],
            coefficients: theta[1..].to_vec(),
        }
    }
}

pub fn fit_univariate(x: &DMatrix<f64>, y: &[bool]) -> Result<UnivariateLogisticModel> {
    fit_named(x, y, "y")
}

pub(crate) fn fit_named(x: &DMatrix<f64>, y: &[bool], label: &str) -> Result<UnivariateLogisticModel> {
    if x.nrows() <= x.ncols() + 1 {
        return Err(Error::Dimension(format!(
            "{} rows cannot identify {} coefficients",
            x.nrows(),
            x.ncols() + 1
        )));
    }
    let (theta, _) = fit_logistic(&with_intercept(x), y, None, label)?;
    Ok(UnivariateLogisticModel::from_parameters(&theta))
}

/// Product-form joint risk from two marginal models.
pub fn predict_univariate_joint(
    m1: &UnivariateLogisticModel,
    m2: &UnivariateLogisticModel,
    x: &[f64],
) -> JointRisk {
    JointRisk::from_independent(m1.predict(x), m2.predict(x))
}

/// The `univariate` method: one model per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePair {
    pub outcome1: UnivariateLogisticModel,
    pub outcome2: UnivariateLogisticModel,
}

impl UnivariatePair {
    pub fn fit(x: &DMatrix<f64>, y1: &[bool], y2: &[bool]) -> Result<Self> {
        Ok(Self {
            outcome1: fit_named(x, y1, "y1")?,
            outcome2: fit_named(x, y2, "y2")?,
        })
    }

    pub fn predict(&self, x: &[f64]) -> JointRisk {
        predict_univariate_joint(&self.outcome1, &self.outcome2, x)
    }
}
