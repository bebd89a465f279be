//! Multinomial logistic regression on the four outcome combinations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::glm::{
    fit_multinomial_likelihood, require_all_categories, with_intercept, Category,
    MultinomialLikelihood,
};
use crate::risk::JointRisk;

/// Coefficients `(β0k, βk)` for categories 11, 10, 01 against reference 00.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialModel {
    pub coefficients: [Vec<f64>; 3],
}

impl MultinomialModel {
    pub fn linear_predictors(&self, x: &[f64]) -> [f64; 3] {
        std::array::from_fn(|k| {
            let c = &self.coefficients[k];
            c[0] + c[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
        })
    }
}

pub fn fit_multinomial(x: &DMatrix<f64>, y1: &[bool], y2: &[bool]) -> Result<MultinomialModel> {
    let cats: Vec<Category> = y1
        .iter()
        .zip(y2)
        .map(|(&a, &b)| Category::from_outcomes(a, b))
        .collect();
    require_all_categories(&cats)?;
    let design = with_intercept(x);
    let lik = MultinomialLikelihood {
        designs: [&design, &design, &design],
        offsets: None,
        categories: &cats,
    };
    let mut counts = [0usize; 4];
    for &c in &cats {
        counts[c as usize] += 1;
    }
    let p1 = design.ncols();
    let mut init = vec![0.0; 3 * p1];
    for k in 0..3 {
        init[k * p1] = (counts[k] as f64 / counts[3] as f64).ln();
    }
    let (theta, _) = fit_multinomial_likelihood(&lik, &init)?;
    Ok(MultinomialModel {
        coefficients: std::array::from_fn(|k| theta[k * p1..(k + 1) * p1].to_vec()),
    })
}

pub fn predict_multinomial(m: &MultinomialModel, x: &[f64]) -> JointRisk {
    let eta = m.linear_predictors(x);
    let mx = eta.iter().fold(0.0f64, |a, &b| a.max(b));
    let ex = [(eta[0] - mx).exp(), (eta[1] - mx).exp(), (eta[2] - mx).exp(), (-mx).exp()];
    let denom: f64 = ex.iter().sum();
    JointRisk::from_array(ex.map(|e| e / denom))
}
