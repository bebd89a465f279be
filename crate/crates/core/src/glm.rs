//! Logistic and reference-category multinomial log-likelihoods.
//!
//! Both are used for model fitting and for recalibration models, so they take
//! explicit design matrices (intercept columns included by the caller) and
//! optional fixed offsets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::num::optim::{newton_maximize, NewtonOptions, Objective, OptimResult, Termination};
use crate::num::special::{expit, log_expit, logit};

/// Prepend a column of ones.
pub fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(0, 1.0)
}

/// Bernoulli log-likelihood with logit link: `η = design·θ + offset`.
pub struct LogisticLikelihood<'a> {
    pub design: &'a DMatrix<f64>,
    pub y: &'a [bool],
    pub offset: Option<&'a [f64]>,
}

impl LogisticLikelihood<'_> {
    fn linear_predictor(&self, theta: &[f64]) -> DVector<f64> {
        let mut eta = self.design * DVector::from_column_slice(theta);
        if let Some(off) = self.offset {
            for (e, o) in eta.iter_mut().zip(off) {
                *e += o;
            }
        }
        eta
    }
}

impl Objective for LogisticLikelihood<'_> {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let eta = self.linear_predictor(theta);
        eta.iter()
            .zip(self.y)
            .map(|(&e, &y)| if y { log_expit(e) } else { log_expit(-e) })
            .sum()
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let eta = self.linear_predictor(theta);
        let resid = DVector::from_iterator(
            eta.len(),
            eta.iter()
                .zip(self.y)
                .map(|(&e, &y)| y as u8 as f64 - expit(e)),
        );
        (self.design.transpose() * resid).as_slice().to_vec()
    }

    fn hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let eta = self.linear_predictor(theta);
        let k = self.design.ncols();
        let mut h = DMatrix::zeros(k, k);
        for (i, &e) in eta.iter().enumerate() {
            let p = expit(e);
            let w = p * (1.0 - p);
            for a in 0..k {
                let da = self.design[(i, a)] * w;
                for b in 0..=a {
                    h[(a, b)] -= da * self.design[(i, b)];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        Some(h)
    }
}

/// Maximum-likelihood logistic regression on an explicit design.
///
/// `label` names the outcome in error messages.
pub fn fit_logistic(
    design: &DMatrix<f64>,
    y: &[bool],
    offset: Option<&[f64]>,
    label: &str,
) -> Result<(Vec<f64>, OptimResult)> {
    if design.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows but `{label}` has {}",
            design.nrows(),
            y.len()
        )));
    }
    let events = y.iter().filter(|&&v| v).count();
    if events == 0 || events == y.len() {
        return Err(Error::SingleClass(label.to_string()));
    }
    let lik = LogisticLikelihood { design, y, offset };
    let mut init = vec![0.0; design.ncols()];
    // start from the null model when the first column is an intercept
    if offset.is_none() && design.column(0).iter().all(|&v| v == 1.0) {
        init[0] = logit(events as f64 / y.len() as f64)?;
    }
    let res = newton_maximize(&lik, &init, &NewtonOptions::default())?;
    match res.termination {
        Termination::Converged => Ok((res.parameters.clone(), res)),
        Termination::Diverged => Err(Error::Separation(format!(
            "coefficients for `{label}` diverged beyond |30| on the logit scale"
        ))),
        other => Err(Error::NonConvergence(format!(
            "logistic fit for `{label}` stopped with {other:?} (gradient {:.3e})",
            res.gradient_norm
        ))),
    }
}

/// Outcome category for the reference-category multinomial models.
///
/// Ordered as the three non-reference categories followed by the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    C11 = 0,
    C10 = 1,
    C01 = 2,
    C00 = 3,
}

impl Category {
    pub fn from_outcomes(y1: bool, y2: bool) -> Self {
        match (y1, y2) {
            (true, true) => Category::C11,
            (true, false) => Category::C10,
            (false, true) => Category::C01,
            (false, false) => Category::C00,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::C11 => "(Y1=1, Y2=1)",
            Category::C10 => "(Y1=1, Y2=0)",
            Category::C01 => "(Y1=0, Y2=1)",
            Category::C00 => "(Y1=0, Y2=0)",
        }
    }

    pub const ALL: [Category; 4] = [Category::C11, Category::C10, Category::C01, Category::C00];
}

/// Error if any of the four outcome combinations is absent.
pub fn require_all_categories(categories: &[Category]) -> Result<()> {
    let mut seen = [false; 4];
    for &c in categories {
        seen[c as usize] = true;
    }
    match Category::ALL.iter().find(|c| !seen[**c as usize]) {
        Some(c) => Err(Error::EmptyCategory(c.label().to_string())),
        None => Ok(()),
    }
}

/// Multinomial log-likelihood with reference category `C00`.
///
/// Category `k ∈ {C11, C10, C01}` has linear predictor
/// `η_k = designs[k]·θ_k + offsets[k]`, where `θ` is the concatenation of the
/// three blocks.
pub struct MultinomialLikelihood<'a> {
    pub designs: [&'a DMatrix<f64>; 3],
    pub offsets: Option<[&'a [f64]; 3]>,
    pub categories: &'a [Category],
}

impl MultinomialLikelihood<'_> {
    fn block_ranges(&self) -> [std::ops::Range<usize>; 3] {
        let p0 = self.designs[0].ncols();
        let p1 = self.designs[1].ncols();
        let p2 = self.designs[2].ncols();
        [0..p0, p0..p0 + p1, p0 + p1..p0 + p1 + p2]
    }

    fn linear_predictors(&self, theta: &[f64]) -> [DVector<f64>; 3] {
        let ranges = self.block_ranges();
        std::array::from_fn(|k| {
            let mut eta =
                self.designs[k] * DVector::from_column_slice(&theta[ranges[k].clone()]);
            if let Some(offs) = self.offsets {
                for (e, o) in eta.iter_mut().zip(offs[k]) {
                    *e += o;
                }
            }
            eta
        })
    }
}

/// Softmax probabilities of the three non-reference categories (reference
/// has linear predictor 0) and the log normalizer.
#[inline]
pub fn softmax3(eta: [f64; 3]) -> ([f64; 3], f64) {
    let m = eta.iter().fold(0.0f64, |m, &e| m.max(e));
    let ex = [(eta[0] - m).exp(), (eta[1] - m).exp(), (eta[2] - m).exp()];
    let denom = (-m).exp() + ex[0] + ex[1] + ex[2];
    let lse = m + denom.ln();
    ([ex[0] / denom, ex[1] / denom, ex[2] / denom], lse)
}

impl Objective for MultinomialLikelihood<'_> {
    fn dim(&self) -> usize {
        self.designs.iter().map(|d| d.ncols()).sum()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let eta = self.linear_predictors(theta);
        self.categories
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let e = [eta[0][i], eta[1][i], eta[2][i]];
                let (_, lse) = softmax3(e);
                let own = if c == Category::C00 { 0.0 } else { e[c as usize] };
                own - lse
            })
            .sum()
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let eta = self.linear_predictors(theta);
        let ranges = self.block_ranges();
        let mut g = vec![0.0; self.dim()];
        for (i, &c) in self.categories.iter().enumerate() {
            let (pi, _) = softmax3([eta[0][i], eta[1][i], eta[2][i]]);
            for k in 0..3 {
                let r = (c as usize == k) as u8 as f64 - pi[k];
                for (j, idx) in ranges[k].clone().enumerate() {
                    g[idx] += r * self.designs[k][(i, j)];
                }
            }
        }
        g
    }

    fn hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let eta = self.linear_predictors(theta);
        let ranges = self.block_ranges();
        let dim = self.dim();
        let mut h = DMatrix::zeros(dim, dim);
        for i in 0..self.categories.len() {
            let (pi, _) = softmax3([eta[0][i], eta[1][i], eta[2][i]]);
            for k in 0..3 {
                for l in 0..=k {
                    let w = pi[k] * ((k == l) as u8 as f64 - pi[l]);
                    for (a, ia) in ranges[k].clone().enumerate() {
                        let da = self.designs[k][(i, a)] * w;
                        for (b, ib) in ranges[l].clone().enumerate() {
                            h[(ia, ib)] -= da * self.designs[l][(i, b)];
                        }
                    }
                }
            }
        }
        // fill the upper block triangle from the lower one
        for a in 0..dim {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        Some(h)
    }
}

/// Maximum-likelihood fit of a [`MultinomialLikelihood`].
pub fn fit_multinomial_likelihood(
    lik: &MultinomialLikelihood<'_>,
    init: &[f64],
) -> Result<(Vec<f64>, OptimResult)> {
    require_all_categories(lik.categories)?;
    let res = newton_maximize(lik, init, &NewtonOptions::default())?;
    match res.termination {
        Termination::Converged => Ok((res.parameters.clone(), res)),
        Termination::Diverged => Err(Error::Separation(
            "multinomial coefficients diverged beyond |30|".into(),
        )),
        other => Err(Error::NonConvergence(format!(
            "multinomial fit stopped with {other:?} (gradient {:.3e})",
            res.gradient_norm
        ))),
    }
}
