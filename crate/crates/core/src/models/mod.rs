//! The six prediction methods behind one interface.

pub mod multinomial;
pub mod mvl;
pub mod pcc;
pub mod probit;
pub mod stacked;
pub mod univariate;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::rng::RngStream;
use crate::risk::JointRisk;

pub use crate::risk::joint_to_marginals;
pub use multinomial::{fit_multinomial, predict_multinomial, MultinomialModel};
pub use mvl::{fit_mvl, gumbel_joint, predict_mvl, GumbelMvlModel};
pub use pcc::{fit_pcc, predict_pcc, PccModel};
pub use probit::{
    fit_probit, predict_probit, predict_probit_with, GibbsConfig, ProbitPosterior,
    ProbitPrediction, RhoPrior,
};
pub use stacked::{fit_stacked, predict_stacked_joint, LambdaPolicy, StackedModel};
pub use univariate::{
    fit_univariate, predict_univariate_joint, UnivariateLogisticModel, UnivariatePair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Univariate,
    Sr,
    Pcc,
    Mlr,
    Mlm,
    Mpm,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Univariate,
        Method::Sr,
        Method::Pcc,
        Method::Mlr,
        Method::Mlm,
        Method::Mpm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Univariate => "univariate",
            Method::Sr => "sr",
            Method::Pcc => "pcc",
            Method::Mlr => "mlr",
            Method::Mlm => "mlm",
            Method::Mpm => "mpm",
        }
    }

    /// Whether the method can represent residual dependence between outcomes.
    pub fn is_joint(self) -> bool {
        !matches!(self, Method::Univariate | Method::Sr)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method `{s}`; expected one of univariate, sr, pcc, mlr, mlm, mpm"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub lambda: LambdaPolicy,
    /// The chain seed is overwritten from the fitting stream.
    pub gibbs: GibbsConfig,
    pub probit_prediction: ProbitPrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum FittedModel {
    Univariate(UnivariatePair),
    Sr(StackedModel),
    Pcc(PccModel),
    Mlr(MultinomialModel),
    Mlm(GumbelMvlModel),
    Mpm {
        posterior: ProbitPosterior,
        #[serde(default)]
        prediction: ProbitPrediction,
    },
}

/// Batch predictions plus the number of rows that needed clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub risks: Vec<JointRisk>,
    pub clamped: usize,
}

pub fn fit_method(
    method: Method,
    x: &DMatrix<f64>,
    y1: &[bool],
    y2: &[bool],
    opts: &FitOptions,
    rng: &RngStream,
) -> Result<FittedModel> {
    Ok(match method {
        Method::Univariate => FittedModel::Univariate(UnivariatePair::fit(x, y1, y2)?),
        Method::Sr => FittedModel::Sr(fit_stacked(x, y1, y2, opts.lambda, &rng.child("cv-folds"))?),
        Method::Pcc => FittedModel::Pcc(fit_pcc(x, y1, y2)?),
        Method::Mlr => FittedModel::Mlr(fit_multinomial(x, y1, y2)?),
        Method::Mlm => FittedModel::Mlm(fit_mvl(x, y1, y2)?),
        Method::Mpm => {
            let cfg = GibbsConfig {
                seed: rng.child("gibbs").seed(),
                ..opts.gibbs
            };
            FittedModel::Mpm {
                posterior: fit_probit(x, y1, y2, &cfg)?,
                prediction: opts.probit_prediction,
            }
        }
    })
}

impl FittedModel {
    pub fn method(&self) -> Method {
        match self {
            FittedModel::Univariate(_) => Method::Univariate,
            FittedModel::Sr(_) => Method::Sr,
            FittedModel::Pcc(_) => Method::Pcc,
            FittedModel::Mlr(_) => Method::Mlr,
            FittedModel::Mlm(_) => Method::Mlm,
            FittedModel::Mpm { .. } => Method::Mpm,
        }
    }

    /// Number of covariates the model expects.
    pub fn n_covariates(&self) -> usize {
        match self {
            FittedModel::Univariate(m) => m.outcome1.coefficients.len(),
            FittedModel::Sr(m) => m.stage1[0].coefficients.len(),
            FittedModel::Pcc(m) => m.perm1_marginal.coefficients.len(),
            FittedModel::Mlr(m) => m.coefficients[0].len() - 1,
            FittedModel::Mlm(m) => m.beta1.len() - 1,
            FittedModel::Mpm { posterior, .. } => posterior.summary.beta1_mean.len() - 1,
        }
    }

    /// Joint risk at one covariate vector, with a clamping flag (Gumbel only).
    pub fn predict_one(&self, x: &[f64]) -> (JointRisk, bool) {
        match self {
            FittedModel::Univariate(m) => (m.predict(x), false),
            FittedModel::Sr(m) => (predict_stacked_joint(m, x), false),
            FittedModel::Pcc(m) => (predict_pcc(m, x), false),
            FittedModel::Mlr(m) => (predict_multinomial(m, x), false),
            FittedModel::Mlm(m) => predict_mvl(m, x),
            FittedModel::Mpm { posterior, prediction } => {
                (predict_probit_with(posterior, x, *prediction), false)
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> JointRisk {
        self.predict_one(x).0
    }

    pub fn predict_batch(&self, x: &DMatrix<f64>) -> Result<Predictions> {
        if x.ncols() != self.n_covariates() {
            return Err(Error::Dimension(format!(
                "model expects {} covariates, got {}",
                self.n_covariates(),
                x.ncols()
            )));
        }
        let mut risks = Vec::with_capacity(x.nrows());
        let mut clamped = 0;
        let mut row = vec![0.0; x.ncols()];
        for i in 0..x.nrows() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[(i, j)];
            }
            let (r, c) = self.predict_one(&row);
            clamped += c as usize;
            risks.push(r);
        }
        Ok(Predictions { risks, clamped })
    }
}
