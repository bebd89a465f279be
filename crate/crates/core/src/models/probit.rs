//! Bayesian bivariate probit regression by data augmentation.
//!
//! `Yj = 1{Zj > 0}` with `Zj = xᵀβj + εj` and `(ε1, ε2)` standard bivariate
//! normal with correlation `ρ`. Each sweep draws the latents from truncated
//! conditional normals, each `βj` from its Gaussian full conditional, and `ρ`
//! by a reflecting random-walk Metropolis step.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::rng::RngStream;
use crate::num::special::{bvn_unchecked, quantile_unchecked};
use crate::num::truncnorm::standard_lower_truncated;
use crate::risk::JointRisk;

/// Prior on `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoPrior {
    /// Uniform on `(−1, 1)`.
    #[default]
    Symmetric,
    /// Uniform on `(0, 1)`.
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub total_samples: usize,
    pub burn_in: usize,
    /// Standard deviation of the `ρ` random-walk proposal.
    pub rho_proposal_sd: f64,
    pub seed: u64,
    /// Prior variance of every regression coefficient.
    pub prior_variance: f64,
    pub rho_prior: RhoPrior,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            total_samples: 10_000,
            burn_in: 5_000,
            rho_proposal_sd: 0.05,
            seed: 0,
            prior_variance: 10.0,
            rho_prior: RhoPrior::Symmetric,
        }
    }
}

impl GibbsConfig {
    /// Shorter chain for desk-scale simulation runs.
    pub fn fast() -> Self {
        Self {
            total_samples: 2_000,
            burn_in: 1_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.total_samples {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of samples ({})",
                self.burn_in, self.total_samples
            )));
        }
        if !(self.rho_proposal_sd > 0.0) || !self.rho_proposal_sd.is_finite() {
            return Err(Error::Config(format!(
                "rho proposal scale must be positive, got {}",
                self.rho_proposal_sd
            )));
        }
        if !(self.prior_variance > 0.0) || !self.prior_variance.is_finite() {
            return Err(Error::Config(format!(
                "prior variance must be positive, got {}",
                self.prior_variance
            )));
        }
        Ok(())
    }
}

/// Consecutive rejected `ρ` proposals that abort the chain.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitSummary {
    pub beta1_mean: Vec<f64>,
    pub beta2_mean: Vec<f64>,
    pub rho_mean: f64,
    pub beta1_sd: Vec<f64>,
    pub beta2_sd: Vec<f64>,
    pub rho_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub rho_acceptance_rate: f64,
    pub retained: usize,
    pub burn_in: usize,
}

/// One retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitDraw {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitPosterior {
    pub draws: Vec<ProbitDraw>,
    pub summary: ProbitSummary,
    pub diagnostics: ChainDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbitPrediction {
    /// Plug in the posterior-mean parameters.
    #[default]
    PosteriorMean,
    /// Average the joint risk over retained draws.
    DrawAverage,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn summarize(draws: &[ProbitDraw]) -> ProbitSummary {
    let k = draws[0].beta1.len();
    let col = |f: &dyn Fn(&ProbitDraw) -> f64| mean_sd(draws.iter().map(f));
    let (b1, b1sd): (Vec<f64>, Vec<f64>) = (0..k).map(|j| col(&|d| d.beta1[j])).unzip();
    let (b2, b2sd): (Vec<f64>, Vec<f64>) = (0..k).map(|j| col(&|d| d.beta2[j])).unzip();
    let (rho, rho_sd) = col(&|d| d.rho);
    ProbitSummary {
        beta1_mean: b1,
        beta2_mean: b2,
        rho_mean: rho,
        beta1_sd: b1sd,
        beta2_sd: b2sd,
        rho_sd,
    }
}

/// Gaussian full conditional of one coefficient block:
/// precision `XᵀX/(1−ρ²) + I/v`, mean `Prec⁻¹Xᵀt/(1−ρ²)`.
fn draw_beta(
    xtx: &DMatrix<f64>,
    xt: &DMatrix<f64>,
    target: &DVector<f64>,
    rho: f64,
    prior_variance: f64,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let c = 1.0 / (1.0 - rho * rho);
    let k = xtx.nrows();
    let mut prec = xtx * c;
    for j in 0..k {
        prec[(j, j)] += 1.0 / prior_variance;
    }
    let chol = prec
        .cholesky()
        .ok_or_else(|| Error::Domain("coefficient posterior precision is not positive definite".into()))?;
    let mean = chol.solve(&((xt * target) * c));
    let xi = DVector::from_fn(k, |_, _| rng.standard_normal());
    // L Lᵀ = Prec, so mean + L⁻ᵀξ has covariance Prec⁻¹
    let dev = chol
        .l()
        .transpose()
        .solve_upper_triangular(&xi)
        .ok_or_else(|| Error::Domain("singular Cholesky factor".into()))?;
    Ok(mean + dev)
}

fn rho_log_target(n: f64, s11: f64, s12: f64, s22: f64, rho: f64) -> f64 {
    let one = 1.0 - rho * rho;
    -0.5 * n * one.ln() - (s11 - 2.0 * rho * s12 + s22) / (2.0 * one)
}

/// Reflect a proposal into `(lo, 1)`.
fn reflect(mut r: f64, lo: f64) -> f64 {
    for _ in 0..64 {
        if r >= 1.0 {
            r = 2.0 - r;
        } else if r <= lo {
            r = 2.0 * lo - r;
        } else {
            break;
        }
    }
    r
}

/// Draw a latent utility given its conditional mean and sd and the observed sign.
#[inline]
fn draw_latent(mean: f64, sd: f64, positive: bool, rng: &mut RngStream) -> f64 {
    let a = -mean / sd;
    if positive {
        mean + sd * standard_lower_truncated(a, rng)
    } else {
        mean - sd * standard_lower_truncated(-a, rng)
    }
}

pub fn fit_probit(
    x: &DMatrix<f64>,
    y1: &[bool],
    y2: &[bool],
    cfg: &GibbsConfig,
) -> Result<ProbitPosterior> {
    cfg.validate()?;
    let n = x.nrows();
    if y1.len() != n || y2.len() != n {
        return Err(Error::Dimension("outcome lengths differ from covariate rows".into()));
    }
    for (label, y) in [("y1", y1), ("y2", y2)] {
        let events = y.iter().filter(|&&v| v).count();
        if events == 0 || events == n {
            return Err(Error::SingleClass(label.into()));
        }
    }
    let mut rng = RngStream::new(cfg.seed);
    let design = crate::glm::with_intercept(x);
    let k = design.ncols();
    let xt = design.transpose();
    let xtx = &xt * &design;
    let nf = n as f64;

    let start = |y: &[bool]| {
        let rate = y.iter().filter(|&&v| v).count() as f64 / nf;
        let mut b = DVector::zeros(k);
        b[0] = quantile_unchecked(rate);
        b
    };
    let mut beta1 = start(y1);
    let mut beta2 = start(y2);
    let mut lp1 = &design * &beta1;
    let mut lp2 = &design * &beta2;
    let mut rho = 0.0f64;
    let mut z1: Vec<f64> = (0..n).map(|i| draw_latent(lp1[i], 1.0, y1[i], &mut rng)).collect();
    let mut z2: Vec<f64> = (0..n).map(|i| draw_latent(lp2[i], 1.0, y2[i], &mut rng)).collect();
    let mut target = DVector::zeros(n);

    let rho_lo = match cfg.rho_prior {
        RhoPrior::Symmetric => -1.0,
        RhoPrior::Positive => 0.0,
    };
    let mut draws = Vec::with_capacity(cfg.total_samples - cfg.burn_in);
    let (mut accepted, mut proposed, mut streak) = (0usize, 0usize, 0usize);

    for sweep in 0..cfg.total_samples {
        let sd = (1.0 - rho * rho).sqrt();
        for i in 0..n {
            z1[i] = draw_latent(lp1[i] + rho * (z2[i] - lp2[i]), sd, y1[i], &mut rng);
            z2[i] = draw_latent(lp2[i] + rho * (z1[i] - lp1[i]), sd, y2[i], &mut rng);
        }

        for i in 0..n {
            target[i] = z1[i] - rho * (z2[i] - lp2[i]);
        }
        beta1 = draw_beta(&xtx, &xt, &target, rho, cfg.prior_variance, &mut rng)?;
        lp1 = &design * &beta1;
        for i in 0..n {
            target[i] = z2[i] - rho * (z1[i] - lp1[i]);
        }
        beta2 = draw_beta(&xtx, &xt, &target, rho, cfg.prior_variance, &mut rng)?;
        lp2 = &design * &beta2;

        let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (e1, e2) = (z1[i] - lp1[i], z2[i] - lp2[i]);
            s11 += e1 * e1;
            s12 += e1 * e2;
            s22 += e2 * e2;
        }
        let proposal = reflect(rho + cfg.rho_proposal_sd * rng.standard_normal(), rho_lo);
        proposed += 1;
        let ok = proposal > rho_lo && proposal < 1.0 && {
            let log_ratio = rho_log_target(nf, s11, s12, s22, proposal)
                - rho_log_target(nf, s11, s12, s22, rho);
            rng.uniform_open().ln() < log_ratio
        };
        if ok {
            rho = proposal;
            accepted += 1;
            streak = 0;
        } else {
            streak += 1;
            if streak >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::DegenerateChain(format!(
                    "{streak} consecutive rho proposals rejected at sweep {sweep}; \
                     reduce the proposal scale (currently {})",
                    cfg.rho_proposal_sd
                )));
            }
        }

        if sweep >= cfg.burn_in {
            draws.push(ProbitDraw {
                beta1: beta1.as_slice().to_vec(),
                beta2: beta2.as_slice().to_vec(),
                rho,
            });
        }
    }

    let summary = summarize(&draws);
    Ok(ProbitPosterior {
        diagnostics: ChainDiagnostics {
            rho_acceptance_rate: accepted as f64 / proposed as f64,
            retained: draws.len(),
            burn_in: cfg.burn_in,
        },
        draws,
        summary,
    })
}

/// The three orthant probabilities at linear predictors `(a, b)`.
pub fn probit_joint(a: f64, b: f64, rho: f64) -> JointRisk {
    let p11 = bvn_unchecked(a, b, rho);
    let p10 = bvn_unchecked(a, -b, -rho);
    let p01 = bvn_unchecked(-a, b, -rho);
    JointRisk::new(p11, p10, p01, (1.0 - p11 - p10 - p01).max(0.0))
}

fn lp(beta: &[f64], x: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

pub fn predict_probit(p: &ProbitPosterior, x: &[f64]) -> JointRisk {
    let s = &p.summary;
    probit_joint(lp(&s.beta1_mean, x), lp(&s.beta2_mean, x), s.rho_mean)
}

pub fn predict_probit_with(p: &ProbitPosterior, x: &[f64], mode: ProbitPrediction) -> JointRisk {
    match mode {
        ProbitPrediction::PosteriorMean => predict_probit(p, x),
        ProbitPrediction::DrawAverage if !p.draws.is_empty() => {
            let mut acc = [0.0; 4];
            for d in &p.draws {
                let j = probit_joint(lp(&d.beta1, x), lp(&d.beta2, x), d.rho).as_array();
                for k in 0..4 {
                    acc[k] += j[k];
                }
            }
            let m = p.draws.len() as f64;
            JointRisk::from_array(acc.map(|v| v / m))
        }
        ProbitPrediction::DrawAverage => predict_probit(p, x),
    }
}
