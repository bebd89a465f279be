//! Correlated binary outcomes through a Gaussian copula.
//!
//! Two latent standard normals `(Z1, Z2)` with correlation `ρ` are mapped to
//! logistic errors `ε = logit(Φ(Z))`; outcome `j` occurs when
//! `ε_j ≤ β0j + β1j·X1 + β2j·X2`. Because the transform is monotone, the
//! implied joint risk is a bivariate normal orthant probability, which is
//! stored alongside each dataset as the truth for MSE.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::num::rng::RngStream;
use crate::num::special::{bvn_unchecked, expit, quantile_unchecked, std_normal_cdf};
use crate::risk::JointRisk;

pub const DEV_N: usize = 5000;
pub const VAL_N: usize = 10_000;
pub const RHO_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    /// `(β01, β11, β21)`.
    pub beta1: [f64; 3],
    /// `(β02, β12, β22)`.
    pub beta2: [f64; 3],
    pub rho: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn base(n: usize, rho: f64) -> Self {
        Self {
            n,
            beta1: [-1.0, 2f64.ln(), 0.0],
            beta2: [-1.5, 0.0, 3f64.ln()],
            rho,
            seed: 0,
        }
    }

    /// Rare-outcome variant with intercepts −3 and −3.5.
    pub fn sensitivity(n: usize, rho: f64) -> Self {
        let mut c = Self::base(n, rho);
        c.beta1[0] = -3.0;
        c.beta2[0] = -3.5;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Domain(format!("rho must lie in [-1, 1], got {}", self.rho)));
        }
        if self.beta1.iter().chain(&self.beta2).any(|b| !b.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn linear_predictors(&self, x1: f64, x2: f64) -> (f64, f64) {
        (
            self.beta1[0] + self.beta1[1] * x1 + self.beta1[2] * x2,
            self.beta2[0] + self.beta2[1] * x1 + self.beta2[2] * x2,
        )
    }
}

/// One cell of the simulation design: a development and a validation config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub rho: f64,
    pub sensitivity: bool,
    pub development: GenConfig,
    pub validation: GenConfig,
}

fn scenario(rho: f64, sensitivity: bool) -> Scenario {
    let make = if sensitivity { GenConfig::sensitivity } else { GenConfig::base };
    let prefix = if sensitivity { "sens" } else { "base" };
    Scenario {
        name: format!("{prefix}_rho{rho:.2}"),
        rho,
        sensitivity,
        development: make(DEV_N, rho),
        validation: make(VAL_N, rho),
    }
}

pub fn base_grid() -> Vec<Scenario> {
    RHO_GRID.iter().map(|&r| scenario(r, false)).collect()
}

pub fn sensitivity_grid() -> Vec<Scenario> {
    RHO_GRID.iter().map(|&r| scenario(r, true)).collect()
}

/// Base scenarios followed by the sensitivity scenarios.
pub fn scenario_grid() -> Vec<Scenario> {
    let mut g = base_grid();
    g.extend(sensitivity_grid());
    g
}

/// Scenario for an arbitrary `rho`, named like the grid entries.
pub fn scenario_for(rho: f64, sensitivity: bool) -> Scenario {
    scenario(rho, sensitivity)
}

/// Generating risks for every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub marginal1: Vec<f64>,
    pub marginal2: Vec<f64>,
    pub joint: Vec<JointRisk>,
}

impl SyntheticTruth {
    pub fn from_joint(joint: Vec<JointRisk>) -> Self {
        Self {
            marginal1: joint.iter().map(JointRisk::marginal1).collect(),
            marginal2: joint.iter().map(JointRisk::marginal2).collect(),
            joint,
        }
    }

    pub fn len(&self) -> usize {
        self.joint.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joint.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub data: Dataset,
    pub truth: SyntheticTruth,
}

/// `Φ⁻¹(expit(lp))`, evaluated on the tail that keeps full precision.
fn latent_threshold(lp: f64) -> f64 {
    if lp <= 0.0 {
        quantile_unchecked(expit(lp))
    } else {
        -quantile_unchecked(expit(-lp))
    }
}

/// Joint risk implied by the copula mechanism at linear predictors `lp1, lp2`.
pub fn true_joint_risk(lp1: f64, lp2: f64, rho: f64) -> JointRisk {
    let (m1, m2) = (expit(lp1), expit(lp2));
    let p11 = bvn_unchecked(latent_threshold(lp1), latent_threshold(lp2), rho.clamp(-1.0, 1.0))
        .clamp((m1 + m2 - 1.0).max(0.0), m1.min(m2));
    let p10 = m1 - p11;
    let p01 = m2 - p11;
    JointRisk {
        p11,
        p10,
        p01,
        p00: (expit(-lp1) - p01).max(0.0),
    }
}

/// `logit(Φ(z))` without cancellation in either tail.
fn logistic_error(z: f64) -> f64 {
    std_normal_cdf(z).ln() - std_normal_cdf(-z).ln()
}

/// One draw of the two outcomes given linear predictors.
pub fn draw_outcomes(lp1: f64, lp2: f64, rho: f64, rng: &mut RngStream) -> (bool, bool) {
    let z1 = rng.standard_normal();
    let z2 = rho * z1 + (1.0 - rho * rho).max(0.0).sqrt() * rng.standard_normal();
    (logistic_error(z1) <= lp1, logistic_error(z2) <= lp2)
}

pub fn generate_dataset(config: &GenConfig, rng: &mut RngStream) -> Result<SyntheticDataset> {
    config.validate()?;
    let n = config.n;
    let mut x = DMatrix::zeros(n, 2);
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    let mut joint = Vec::with_capacity(n);
    for i in 0..n {
        let (x1, x2) = (rng.standard_normal(), rng.standard_normal());
        x[(i, 0)] = x1;
        x[(i, 1)] = x2;
        let (lp1, lp2) = config.linear_predictors(x1, x2);
        let (a, b) = draw_outcomes(lp1, lp2, config.rho, rng);
        y1.push(a);
        y2.push(b);
        joint.push(true_joint_risk(lp1, lp2, config.rho));
    }
    Ok(SyntheticDataset {
        data: Dataset::new(x, y1, y2)?,
        truth: SyntheticTruth::from_joint(joint),
    })
}

/// Pooled outcome summaries in the layout of the correlation table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    /// Phi coefficient between the two outcomes.
    pub corr: f64,
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub prevalence1: f64,
    pub prevalence2: f64,
    pub n: usize,
}

/// Running 2×2 table of outcome counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct OutcomeCounts {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl OutcomeCounts {
    pub fn add(&mut self, y1: &[bool], y2: &[bool]) {
        for (&a, &b) in y1.iter().zip(y2) {
            match (a, b) {
                (true, true) => self.n11 += 1,
                (true, false) => self.n10 += 1,
                (false, true) => self.n01 += 1,
                (false, false) => self.n00 += 1,
            }
        }
    }

    pub fn summary(&self) -> OutcomeSummary {
        let n = (self.n11 + self.n10 + self.n01 + self.n00) as f64;
        let (a, b, c, d) = (self.n11 as f64, self.n10 as f64, self.n01 as f64, self.n00 as f64);
        let denom = ((a + b) * (c + d) * (a + c) * (b + d)).sqrt();
        OutcomeSummary {
            corr: if denom > 0.0 { (a * d - b * c) / denom } else { f64::NAN },
            p11: a / n,
            p10: b / n,
            p01: c / n,
            prevalence1: (a + b) / n,
            prevalence2: (a + c) / n,
            n: n as usize,
        }
    }
}
