//! Gumbel bivariate logistic regression.
//!
//! Marginals are logistic, `Fj = expit(lpj)`, `Sj = 1 − Fj`, and the joint
//! cells are `F1F2 + ρs`, `F1S2 − ρs`, `S1F2 − ρs`, `S1S2 + ρs` with
//! `s = √(F1S1F2S2)`. The admissible `ρ` depends on the marginals, so the
//! likelihood is `-∞` outside the region where every training cell is
//! positive.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::univariate::fit_named;
use crate::error::{Error, Result};
use crate::glm::{require_all_categories, with_intercept, Category};
use crate::num::optim::{newton_maximize, NewtonOptions, Objective, Termination};
use crate::num::special::expit;
use crate::risk::JointRisk;

/// Smallest admissible cell probability during fitting.
pub const CELL_FLOOR: f64 = 1e-12;
pub const RHO_BOX: f64 = 0.99;
/// Distance from the feasibility envelope that counts as a boundary solution.
pub const BOUNDARY_TOL: f64 = 1e-4;
/// Floor applied when a prediction leaves the simplex.
pub const PREDICTION_FLOOR: f64 = 1e-12;

/// The four Gumbel cells and whether all lie in `[0, 1]`.
pub fn gumbel_joint(f1: f64, f2: f64, rho: f64) -> (JointRisk, bool) {
    let (s1, s2) = (1.0 - f1, 1.0 - f2);
    gumbel_cells(f1, s1, f2, s2, rho)
}

fn gumbel_cells(f1: f64, s1: f64, f2: f64, s2: f64, rho: f64) -> (JointRisk, bool) {
    let s = (f1 * s1 * f2 * s2).sqrt();
    let j = JointRisk::new(f1 * f2 + rho * s, f1 * s2 - rho * s, s1 * f2 - rho * s, s1 * s2 + rho * s);
    let valid = j.as_array().iter().all(|p| (0.0..=1.0).contains(p));
    (j, valid)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MvlDiagnostics {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `ρ` within [`BOUNDARY_TOL`] of its feasible envelope.
    pub boundary: bool,
    /// Admissible `ρ` interval at the fitted marginal coefficients.
    pub rho_envelope: [f64; 2],
    /// Smallest fitted cell probability over the training rows.
    pub min_training_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelMvlModel {
    /// `(intercept, slopes…)` for outcome 1.
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub rho: f64,
    pub diagnostics: MvlDiagnostics,
}

impl GumbelMvlModel {
    pub fn linear_predictors(&self, x: &[f64]) -> (f64, f64) {
        let lp = |b: &[f64]| b[0] + b[1..].iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
        (lp(&self.beta1), lp(&self.beta2))
    }
}

/// Log-likelihood in `θ = (β1, β2, ρ)`.
pub struct MvlLikelihood<'a> {
    pub design: &'a DMatrix<f64>,
    pub categories: &'a [Category],
}

struct Row {
    f1: f64,
    s1: f64,
    f2: f64,
    s2: f64,
    s: f64,
}

impl Row {
    fn new(lp1: f64, lp2: f64) -> Self {
        let (f1, s1, f2, s2) = (expit(lp1), expit(-lp1), expit(lp2), expit(-lp2));
        Row { f1, s1, f2, s2, s: (f1 * s1 * f2 * s2).sqrt() }
    }
}

/// Each cell is `a1·a2 + σρs` with `aj ∈ {Fj, Sj}`; `ej = ±1` marks which
/// and `σ = e1·e2`.
fn cell_signs(c: Category) -> (f64, f64) {
    match c {
        Category::C11 => (1.0, 1.0),
        Category::C10 => (1.0, -1.0),
        Category::C01 => (-1.0, 1.0),
        Category::C00 => (-1.0, -1.0),
    }
}

/// First and second derivatives of one cell in `(lp1, lp2, ρ)`.
struct CellDerivatives {
    p: f64,
    d: [f64; 3],
    /// `[∂11, ∂12, ∂22, ∂1ρ, ∂2ρ]`; `∂ρρ` is zero.
    dd: [f64; 5],
}

fn cell_derivatives(r: &Row, c: Category, rho: f64) -> CellDerivatives {
    let (e1, e2) = cell_signs(c);
    let sg = e1 * e2;
    let a1 = if e1 > 0.0 { r.f1 } else { r.s1 };
    let a2 = if e2 > 0.0 { r.f2 } else { r.s2 };
    let (d1, d2) = (r.f1 * r.s1, r.f2 * r.s2);
    let (t1, t2) = (r.s1 - r.f1, r.s2 - r.f2);
    let h1 = 0.5 * r.s * t1;
    let h2 = 0.5 * r.s * t2;
    let s11 = 0.5 * h1 * t1 - r.s * d1;
    let s22 = 0.5 * h2 * t2 - r.s * d2;
    let s12 = 0.25 * r.s * t1 * t2;
    CellDerivatives {
        p: a1 * a2 + sg * rho * r.s,
        d: [e1 * d1 * a2 + sg * rho * h1, e2 * d2 * a1 + sg * rho * h2, sg * r.s],
        dd: [
            e1 * d1 * t1 * a2 + sg * rho * s11,
            sg * d1 * d2 + sg * rho * s12,
            e2 * d2 * t2 * a1 + sg * rho * s22,
            sg * h1,
            sg * h2,
        ],
    }
}

impl MvlLikelihood<'_> {
    fn k(&self) -> usize {
        self.design.ncols()
    }

    fn rows(&self, theta: &[f64]) -> Vec<Row> {
        let k = self.k();
        let b1 = nalgebra::DVector::from_column_slice(&theta[..k]);
        let b2 = nalgebra::DVector::from_column_slice(&theta[k..2 * k]);
        let lp1 = self.design * b1;
        let lp2 = self.design * b2;
        lp1.iter().zip(lp2.iter()).map(|(&a, &b)| Row::new(a, b)).collect()
    }

    fn cell(r: &Row, c: Category, rho: f64) -> f64 {
        let (e1, e2) = cell_signs(c);
        let a1 = if e1 > 0.0 { r.f1 } else { r.s1 };
        let a2 = if e2 > 0.0 { r.f2 } else { r.s2 };
        a1 * a2 + e1 * e2 * rho * r.s
    }

    /// Admissible `ρ` interval keeping every cell above [`CELL_FLOOR`], intersected with the box.
    fn envelope(rows: &[Row]) -> (f64, f64) {
        let margin = 2.0 * CELL_FLOOR;
        let (mut lo, mut hi) = (-RHO_BOX, RHO_BOX);
        for r in rows {
            if r.s <= 0.0 {
                continue;
            }
            lo = lo.max((margin - r.f1 * r.f2) / r.s).max((margin - r.s1 * r.s2) / r.s);
            hi = hi.min((r.f1 * r.s2 - margin) / r.s).min((r.s1 * r.f2 - margin) / r.s);
        }
        (lo, hi)
    }

    fn min_cell(rows: &[Row], rho: f64) -> f64 {
        rows.iter()
            .flat_map(|r| Category::ALL.map(|c| Self::cell(r, c, rho)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Weight of cell `c` in row with observed `obs` for `ℓ + μ·Σ log p`.
    fn weight(c: Category, obs: Category, mu: f64) -> f64 {
        (c == obs) as u8 as f64 + mu
    }

    fn penalized_value(&self, theta: &[f64], mu: f64) -> f64 {
        let rho = theta[2 * self.k()];
        if !(rho.abs() <= RHO_BOX) {
            return f64::NEG_INFINITY;
        }
        let mut total = 0.0;
        for (r, &obs) in self.rows(theta).iter().zip(self.categories) {
            for c in Category::ALL {
                let p = Self::cell(r, c, rho);
                if !(p > CELL_FLOOR) {
                    return f64::NEG_INFINITY;
                }
                let w = Self::weight(c, obs, mu);
                if w != 0.0 {
                    total += w * p.ln();
                }
            }
        }
        total
    }

    /// Per-row derivatives of `Σ_c w_c log p_c` in `(lp1, lp2, ρ)`:
    /// gradient `[g1, g2, gρ]` and Hessian `[h11, h12, h22, h1ρ, h2ρ, hρρ]`.
    fn row_terms(r: &Row, obs: Category, rho: f64, mu: f64) -> ([f64; 3], [f64; 6]) {
        let mut g = [0.0; 3];
        let mut h = [0.0; 6];
        for c in Category::ALL {
            let w = Self::weight(c, obs, mu);
            if w == 0.0 {
                continue;
            }
            let cd = cell_derivatives(r, c, rho);
            let inv = 1.0 / cd.p;
            let q = [cd.d[0] * inv, cd.d[1] * inv, cd.d[2] * inv];
            for j in 0..3 {
                g[j] += w * q[j];
            }
            h[0] += w * (cd.dd[0] * inv - q[0] * q[0]);
            h[1] += w * (cd.dd[1] * inv - q[0] * q[1]);
            h[2] += w * (cd.dd[2] * inv - q[1] * q[1]);
            h[3] += w * (cd.dd[3] * inv - q[0] * q[2]);
            h[4] += w * (cd.dd[4] * inv - q[1] * q[2]);
            h[5] += w * (-q[2] * q[2]);
        }
        (g, h)
    }

    fn penalized_gradient(&self, theta: &[f64], mu: f64) -> Vec<f64> {
        let k = self.k();
        let rho = theta[2 * k];
        let mut g = vec![0.0; 2 * k + 1];
        for (i, (r, &obs)) in self.rows(theta).iter().zip(self.categories).enumerate() {
            let (gr, _) = Self::row_terms(r, obs, rho, mu);
            for j in 0..k {
                let xv = self.design[(i, j)];
                g[j] += gr[0] * xv;
                g[k + j] += gr[1] * xv;
            }
            g[2 * k] += gr[2];
        }
        g
    }

    fn penalized_hessian(&self, theta: &[f64], mu: f64) -> DMatrix<f64> {
        let k = self.k();
        let rho = theta[2 * k];
        let dim = 2 * k + 1;
        let mut hm = DMatrix::zeros(dim, dim);
        for (i, (r, &obs)) in self.rows(theta).iter().zip(self.categories).enumerate() {
            let (_, h) = Self::row_terms(r, obs, rho, mu);
            for a in 0..k {
                let xa = self.design[(i, a)];
                for b in 0..=a {
                    let xab = xa * self.design[(i, b)];
                    hm[(a, b)] += h[0] * xab;
                    hm[(k + a, k + b)] += h[2] * xab;
                }
                for b in 0..k {
                    hm[(k + b, a)] += h[1] * xa * self.design[(i, b)];
                }
                hm[(2 * k, a)] += h[3] * xa;
                hm[(2 * k, k + a)] += h[4] * xa;
            }
            hm[(2 * k, 2 * k)] += h[5];
        }
        for a in 0..dim {
            for b in 0..a {
                hm[(b, a)] = hm[(a, b)];
            }
        }
        hm
    }
}

impl Objective for MvlLikelihood<'_> {
    fn dim(&self) -> usize {
        2 * self.k() + 1
    }
    fn value(&self, theta: &[f64]) -> f64 {
        self.penalized_value(theta, 0.0)
    }
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.penalized_gradient(theta, 0.0)
    }
    fn hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.penalized_hessian(theta, 0.0))
    }
}

/// Log-likelihood plus a logarithmic barrier `μ·Σ log p` on every training cell.
struct Barrier<'a, 'b> {
    inner: &'b MvlLikelihood<'a>,
    mu: f64,
}

impl Objective for Barrier<'_, '_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, theta: &[f64]) -> f64 {
        self.inner.penalized_value(theta, self.mu)
    }
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.inner.penalized_gradient(theta, self.mu)
    }
    fn hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.inner.penalized_hessian(theta, self.mu))
    }
}

/// Barrier weights, from coarse to fine.
const BARRIER_PATH: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Near the boundary the barrier gradient carries `1/p` terms that cancel,
/// so stages stop at a rounding-level gradient rather than the usual 1e-8.
const BARRIER_STAGE: NewtonOptions = NewtonOptions {
    tol: 1e-6,
    max_iter: 40,
    divergence_bound: Some(30.0),
    max_halvings: 60,
};

pub fn fit_mvl(x: &DMatrix<f64>, y1: &[bool], y2: &[bool]) -> Result<GumbelMvlModel> {
    let cats: Vec<Category> = y1
        .iter()
        .zip(y2)
        .map(|(&a, &b)| Category::from_outcomes(a, b))
        .collect();
    require_all_categories(&cats)?;
    let m1 = fit_named(x, y1, "y1")?;
    let m2 = fit_named(x, y2, "y2")?;
    let design = with_intercept(x);
    let k = design.ncols();
    let lik = MvlLikelihood { design: &design, categories: &cats };

    let start: Vec<f64> = std::iter::once(m1.intercept)
        .chain(m1.coefficients.iter().copied())
        .chain(std::iter::once(m2.intercept))
        .chain(m2.coefficients.iter().copied())
        .chain(std::iter::once(0.0))
        .collect();
    if !lik.value(&start).is_finite() {
        return Err(Error::Domain("independence starting point is infeasible".into()));
    }
    let diverged = || Error::Separation("bivariate logistic coefficients diverged beyond |30|".into());

    let opts = NewtonOptions { max_iter: 30, ..Default::default() };
    let direct = newton_maximize(&lik, &start, &opts)?;
    if direct.termination == Termination::Diverged {
        return Err(diverged());
    }
    let mut iterations = direct.iterations;
    let mut converged = direct.converged;
    let mut theta = direct.parameters;

    if !converged {
        // The optimum is on the feasibility boundary, where full Newton steps
        // keep leaving the region; follow a barrier path towards it instead.
        theta = start;
        for (stage, &mu) in BARRIER_PATH.iter().enumerate() {
            let r = newton_maximize(&Barrier { inner: &lik, mu }, &theta, &BARRIER_STAGE)?;
            if r.termination == Termination::Diverged {
                return Err(diverged());
            }
            iterations += r.iterations;
            theta = r.parameters;
            if stage + 1 == BARRIER_PATH.len() {
                converged = r.converged;
            }
        }
    }

    let rows = lik.rows(&theta);
    let rho = theta[2 * k];
    let (lo, hi) = MvlLikelihood::envelope(&rows);
    let boundary = rho - lo <= BOUNDARY_TOL || hi - rho <= BOUNDARY_TOL;
    if !converged && !boundary {
        return Err(Error::NonConvergence(format!(
            "bivariate logistic fit stalled in the interior (rho = {rho:.4})"
        )));
    }
    Ok(GumbelMvlModel {
        beta1: theta[..k].to_vec(),
        beta2: theta[k..2 * k].to_vec(),
        rho,
        diagnostics: MvlDiagnostics {
            log_likelihood: lik.value(&theta),
            iterations,
            converged: converged || boundary,
            boundary,
            rho_envelope: [lo, hi],
            min_training_probability: MvlLikelihood::min_cell(&rows, rho),
        },
    })
}

/// Joint risk at `x`; the flag reports whether clamping was needed.
pub fn predict_mvl(m: &GumbelMvlModel, x: &[f64]) -> (JointRisk, bool) {
    let (a, b) = m.linear_predictors(x);
    let (j, valid) = gumbel_cells(expit(a), expit(-a), expit(b), expit(-b), m.rho);
    if valid {
        (j, false)
    } else {
        let p = j.as_array().map(|v| v.clamp(PREDICTION_FLOOR, 1.0));
        let s: f64 = p.iter().sum();
        (JointRisk::from_array(p.map(|v| v / s)), true)
    }
}
