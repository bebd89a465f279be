//! Calibration, discrimination and accuracy of joint and marginal predictions.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::datagen::SyntheticTruth;
use crate::error::{Error, Result};
use crate::glm::{
    fit_logistic, fit_multinomial_likelihood, require_all_categories, Category,
    MultinomialLikelihood,
};
use crate::num::special::logit_unchecked;
use crate::risk::JointRisk;

/// Floor applied to predicted probabilities before taking logits or log-ratios.
pub const PROBABILITY_FLOOR: f64 = 1e-10;

fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
}

fn check_lengths(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{what}: lengths {a} and {b} differ")));
    }
    Ok(())
}

fn check_both_classes(y: &[bool], label: &str) -> Result<()> {
    let events = y.iter().filter(|&&v| v).count();
    if events == 0 || events == y.len() {
        return Err(Error::SingleClass(label.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalCalibration {
    pub citl: f64,
    pub slope: f64,
}

/// Intercept `α` of `logit P(y = 1) = α + logit(pred)` with the logit as offset.
pub fn marginal_citl(pred: &[f64], y: &[bool]) -> Result<f64> {
    check_lengths(pred.len(), y.len(), "calibration-in-the-large")?;
    check_both_classes(y, "y")?;
    let offset: Vec<f64> = pred.iter().map(|&p| logit_unchecked(clamp_probability(p))).collect();
    let ones = DMatrix::from_element(y.len(), 1, 1.0);
    let (theta, _) = fit_logistic(&ones, y, Some(&offset), "y")?;
    Ok(theta[0])
}

/// Slope of a logistic regression of `y` on `logit(pred)` with a free intercept.
pub fn marginal_slope(pred: &[f64], y: &[bool]) -> Result<f64> {
    check_lengths(pred.len(), y.len(), "calibration slope")?;
    check_both_classes(y, "y")?;
    let lp: Vec<f64> = pred.iter().map(|&p| logit_unchecked(clamp_probability(p))).collect();
    let (lo, hi) = lp
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-12 * (1.0 + hi.abs()) {
        return Err(Error::UndefinedSlope("predictions are constant".into()));
    }
    let design = DMatrix::from_fn(y.len(), 2, |i, j| if j == 0 { 1.0 } else { lp[i] });
    let (theta, _) = fit_logistic(&design, y, None, "y")?;
    Ok(theta[1])
}

pub fn marginal_calibration(pred: &[f64], y: &[bool]) -> Result<MarginalCalibration> {
    Ok(MarginalCalibration {
        citl: marginal_citl(pred, y)?,
        slope: marginal_slope(pred, y)?,
    })
}

/// Recalibration intercepts and slopes for categories 11, 10, 01 (reference 00).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCalibration {
    pub citl: [f64; 3],
    pub slope: [f64; 3],
}

/// Log-ratios `log(P̂k / P̂00)` after flooring and renormalizing.
pub fn log_ratios(preds: &[JointRisk]) -> [Vec<f64>; 3] {
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(preds.len()));
    for p in preds {
        let c = p.clamped(PROBABILITY_FLOOR);
        let l00 = c.p00.ln();
        out[0].push(c.p11.ln() - l00);
        out[1].push(c.p10.ln() - l00);
        out[2].push(c.p01.ln() - l00);
    }
    out
}

/// Multinomial recalibration of joint predictions.
///
/// Intercepts come from a fit with each log-ratio entering its own category
/// as an offset (slope one, cross terms zero); slopes from a fit with each
/// log-ratio as the only covariate of its own category.
pub fn joint_calibration(preds: &[JointRisk], y1: &[bool], y2: &[bool]) -> Result<JointCalibration> {
    check_lengths(preds.len(), y1.len(), "joint calibration")?;
    check_lengths(preds.len(), y2.len(), "joint calibration")?;
    let cats: Vec<Category> = y1
        .iter()
        .zip(y2)
        .map(|(&a, &b)| Category::from_outcomes(a, b))
        .collect();
    require_all_categories(&cats)?;
    let lr = log_ratios(preds);
    let n = preds.len();

    let ones = DMatrix::from_element(n, 1, 1.0);
    let fit_a = MultinomialLikelihood {
        designs: [&ones, &ones, &ones],
        offsets: Some([&lr[0], &lr[1], &lr[2]]),
        categories: &cats,
    };
    let (citl, _) = fit_multinomial_likelihood(&fit_a, &[0.0; 3])?;

    let designs: [DMatrix<f64>; 3] =
        std::array::from_fn(|k| DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { lr[k][i] }));
    let fit_b = MultinomialLikelihood {
        designs: [&designs[0], &designs[1], &designs[2]],
        offsets: None,
        categories: &cats,
    };
    let (theta, _) = fit_multinomial_likelihood(&fit_b, &[citl[0], 1.0, citl[1], 1.0, citl[2], 1.0])?;
    Ok(JointCalibration {
        citl: [citl[0], citl[1], citl[2]],
        slope: [theta[1], theta[3], theta[5]],
    })
}

/// Area under the ROC curve by midranks; ties count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores.len(), labels.len(), "auc")?;
    check_both_classes(labels, "labels")?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("scores contain NaN".into()));
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_cases = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share their average
        let mid = 0.5 * ((i + 1) + j) as f64;
        rank_sum_cases += mid * order[i..j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j;
    }
    let n1 = labels.iter().filter(|&&v| v).count() as f64;
    let n0 = n as f64 - n1;
    Ok((rank_sum_cases - n1 * (n1 + 1.0) / 2.0) / (n1 * n0))
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len(), "mse")?;
    if pred.is_empty() {
        return Err(Error::Dimension("mse of an empty vector".into()));
    }
    Ok(pred.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    P11,
    P10,
    P01,
    PY1,
    PY2,
}

impl Target {
    pub const ALL: [Target; 5] = [Target::P11, Target::P10, Target::P01, Target::PY1, Target::PY2];
    pub const JOINT: [Target; 3] = [Target::P11, Target::P10, Target::P01];
    pub const MARGINAL: [Target; 2] = [Target::PY1, Target::PY2];

    pub fn tag(self) -> &'static str {
        match self {
            Target::P11 => "P11",
            Target::P10 => "P10",
            Target::P01 => "P01",
            Target::PY1 => "PY1",
            Target::PY2 => "PY2",
        }
    }

    pub fn is_joint(self) -> bool {
        matches!(self, Target::P11 | Target::P10 | Target::P01)
    }

    pub fn of(self, j: &JointRisk) -> f64 {
        match self {
            Target::P11 => j.p11,
            Target::P10 => j.p10,
            Target::P01 => j.p01,
            Target::PY1 => j.marginal1(),
            Target::PY2 => j.marginal2(),
        }
    }

    /// Whether an observation belongs to this target's event.
    pub fn indicator(self, y1: bool, y2: bool) -> bool {
        match self {
            Target::P11 => y1 && y2,
            Target::P10 => y1 && !y2,
            Target::P01 => !y1 && y2,
            Target::PY1 => y1,
            Target::PY2 => y2,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown target `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Citl,
    Slope,
    Auc,
    Mse,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Citl, Metric::Slope, Metric::Auc, Metric::Mse];

    pub fn tag(self) -> &'static str {
        match self {
            Metric::Citl => "citl",
            Metric::Slope => "slope",
            Metric::Auc => "auc",
            Metric::Mse => "mse",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    pub target: Target,
    pub citl: f64,
    pub slope: f64,
    pub auc: f64,
    /// Present only when the generating risks are known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
}

impl TargetMetrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Citl => Some(self.citl),
            Metric::Slope => Some(self.slope),
            Metric::Auc => Some(self.auc),
            Metric::Mse => self.mse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<usize>,
    pub targets: Vec<TargetMetrics>,
}

impl MetricsReport {
    pub fn target(&self, t: Target) -> Option<&TargetMetrics> {
        self.targets.iter().find(|m| m.target == t)
    }
}

/// Score joint predictions against observed outcomes and, optionally, the
/// generating risks.
pub fn evaluate_model(
    preds: &[JointRisk],
    y1: &[bool],
    y2: &[bool],
    truth: Option<&SyntheticTruth>,
) -> Result<MetricsReport> {
    check_lengths(preds.len(), y1.len(), "evaluation")?;
    check_lengths(preds.len(), y2.len(), "evaluation")?;
    if let Some(t) = truth {
        check_lengths(preds.len(), t.len(), "evaluation truth")?;
    }
    let jc = joint_calibration(preds, y1, y2)?;
    let mut targets = Vec::with_capacity(5);
    for (k, target) in Target::ALL.into_iter().enumerate() {
        let p: Vec<f64> = preds.iter().map(|j| target.of(j)).collect();
        let ind: Vec<bool> = y1.iter().zip(y2).map(|(&a, &b)| target.indicator(a, b)).collect();
        let (citl, slope) = if target.is_joint() {
            (jc.citl[k], jc.slope[k])
        } else {
            let mc = marginal_calibration(&p, &ind)?;
            (mc.citl, mc.slope)
        };
        let mse = match truth {
            Some(t) => {
                let tv: Vec<f64> = t.joint.iter().map(|j| target.of(j)).collect();
                Some(mse(&p, &tv)?)
            }
            None => None,
        };
        targets.push(TargetMetrics {
            target,
            citl,
            slope,
            auc: auc(&p, &ind)?,
            mse,
        });
    }
    Ok(MetricsReport {
        targets,
        ..Default::default()
    })
}
