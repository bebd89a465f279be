//! Probabilistic classifier chains over both outcome orderings.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::univariate::{fit_named, UnivariateLogisticModel};
use crate::error::{Error, Result};
use crate::risk::JointRisk;

/// Four separately fitted logistic models. Each conditional model's last
/// coefficient multiplies the preceding outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PccModel {
    /// `Y1 | X`.
    pub perm1_marginal: UnivariateLogisticModel,
    /// `Y2 | X, Y1`.
    pub perm1_conditional: UnivariateLogisticModel,
    /// `Y2 | X`.
    pub perm2_marginal: UnivariateLogisticModel,
    /// `Y1 | X, Y2`.
    pub perm2_conditional: UnivariateLogisticModel,
}

fn augment(x: &DMatrix<f64>, y: &[bool]) -> DMatrix<f64> {
    let p = x.ncols();
    let mut out = x.clone().insert_column(p, 0.0);
    for (i, &v) in y.iter().enumerate() {
        out[(i, p)] = v as u8 as f64;
    }
    out
}

fn with_outcome(x: &[f64], y: bool) -> Vec<f64> {
    let mut v = x.to_vec();
    v.push(y as u8 as f64);
    v
}

pub fn fit_pcc(x: &DMatrix<f64>, y1: &[bool], y2: &[bool]) -> Result<PccModel> {
    let tag = |which: &'static str| {
        move |e: Error| match e {
            Error::Separation(m) => Error::Separation(format!("{which}: {m}")),
            Error::NonConvergence(m) => Error::NonConvergence(format!("{which}: {m}")),
            other => other,
        }
    };
    Ok(PccModel {
        perm1_marginal: fit_named(x, y1, "y1").map_err(tag("Y1|X"))?,
        perm1_conditional: fit_named(&augment(x, y1), y2, "y2").map_err(tag("Y2|X,Y1"))?,
        perm2_marginal: fit_named(x, y2, "y2").map_err(tag("Y2|X"))?,
        perm2_conditional: fit_named(&augment(x, y2), y1, "y1").map_err(tag("Y1|X,Y2"))?,
    })
}

impl PccModel {
    /// Joint risk under the Y1 → Y2 chain.
    pub fn permutation1(&self, x: &[f64]) -> JointRisk {
        let p1 = self.perm1_marginal.predict(x);
        let q1 = self.perm1_conditional.predict(&with_outcome(x, true));
        let q0 = self.perm1_conditional.predict(&with_outcome(x, false));
        JointRisk::new(p1 * q1, p1 * (1.0 - q1), (1.0 - p1) * q0, (1.0 - p1) * (1.0 - q0))
    }

    /// Joint risk under the Y2 → Y1 chain.
    pub fn permutation2(&self, x: &[f64]) -> JointRisk {
        let p2 = self.perm2_marginal.predict(x);
        let q1 = self.perm2_conditional.predict(&with_outcome(x, true));
        let q0 = self.perm2_conditional.predict(&with_outcome(x, false));
        JointRisk::new(p2 * q1, (1.0 - p2) * q0, p2 * (1.0 - q1), (1.0 - p2) * (1.0 - q0))
    }
}

/// Equal-weight ensemble of the two chains.
pub fn predict_pcc(m: &PccModel, x: &[f64]) -> JointRisk {
    let a = m.permutation1(x).as_array();
    let b = m.permutation2(x).as_array();
    JointRisk::from_array(std::array::from_fn(|k| 0.5 * (a[k] + b[k])))
}
