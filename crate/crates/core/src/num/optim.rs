//! Damped Newton ascent with backtracking line search.
//!
//! Every likelihood in the crate is smooth and low dimensional, so a plain
//! Newton iteration with two safeguards is enough: a ridge is added to the
//! negated Hessian until it is positive definite, and steps are halved until
//! the objective does not decrease. Infeasible points are signalled by the
//! objective returning `-∞` and are rejected by the same line search.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A smooth objective to be maximized.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Objective value; `-∞` (or NaN) marks an infeasible point.
    fn value(&self, theta: &[f64]) -> f64;

    fn gradient(&self, theta: &[f64]) -> Vec<f64>;

    /// Analytic Hessian. `None` falls back to finite differences of the gradient.
    fn hessian(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Stop and flag divergence once any parameter exceeds this magnitude.
    pub divergence_bound: Option<f64>,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            divergence_bound: Some(30.0),
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No non-decreasing step found along the Newton direction.
    LineSearchStalled,
    /// A parameter crossed the divergence bound (e.g. separation).
    Diverged,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub parameters: Vec<f64>,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub termination: Termination,
    /// Largest ridge added to make the negated Hessian positive definite.
    pub max_ridge: f64,
}

const FLAT_STEP: f64 = 1e-3;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Hessian by differencing the analytic gradient; falls back to one-sided
/// differences when a central probe leaves the feasible region.
pub fn finite_difference_hessian<O: Objective + ?Sized>(obj: &O, theta: &[f64]) -> DMatrix<f64> {
    let k = theta.len();
    let mut h = DMatrix::zeros(k, k);
    let g0 = obj.gradient(theta);
    let mut probe = theta.to_vec();
    for j in 0..k {
        let step = 1e-5 * theta[j].abs().max(1.0);
        probe[j] = theta[j] + step;
        let gp = obj.gradient(&probe);
        let fp_ok = obj.value(&probe).is_finite() && gp.iter().all(|v| v.is_finite());
        probe[j] = theta[j] - step;
        let gm = obj.gradient(&probe);
        let fm_ok = obj.value(&probe).is_finite() && gm.iter().all(|v| v.is_finite());
        probe[j] = theta[j];
        for i in 0..k {
            h[(i, j)] = match (fp_ok, fm_ok) {
                (true, true) => (gp[i] - gm[i]) / (2.0 * step),
                (true, false) => (gp[i] - g0[i]) / step,
                (false, true) => (g0[i] - gm[i]) / step,
                (false, false) => 0.0,
            };
        }
    }
    (&h + h.transpose()) * 0.5
}

/// Central finite-difference gradient of an arbitrary function.
pub fn numerical_gradient<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64], rel_step: f64) -> Vec<f64> {
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            let step = rel_step * theta[j].abs().max(1.0);
            probe[j] = theta[j] + step;
            let fp = f(&probe);
            probe[j] = theta[j] - step;
            let fm = f(&probe);
            probe[j] = theta[j];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Solve `(A + τI) d = g` for the smallest ridge τ (from a geometric ladder)
/// that makes `A + τI` positive definite. Returns the step and τ.
fn damped_solve(neg_hessian: &DMatrix<f64>, g: &[f64]) -> (DVector<f64>, f64) {
    let k = g.len();
    let rhs = DVector::from_column_slice(g);
    let scale = (0..k)
        .map(|i| neg_hessian[(i, i)].abs())
        .fold(0.0f64, f64::max)
        .max(1e-8);
    let mut ridge = 0.0;
    loop {
        let mut a = neg_hessian.clone();
        for i in 0..k {
            a[(i, i)] += ridge;
        }
        if let Some(chol) = a.cholesky() {
            let d = chol.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return (d, ridge);
            }
        }
        ridge = if ridge == 0.0 { 1e-10 * scale } else { ridge * 10.0 };
        if ridge > 1e12 * scale {
            // gradient ascent as a last resort
            return (rhs / scale, ridge);
        }
    }
}

/// Maximize `obj` from `init` by damped Newton iteration.
///
/// Errors only when the starting point is infeasible; non-convergence is
/// reported through [`OptimResult::termination`].
pub fn newton_maximize<O: Objective + ?Sized>(
    obj: &O,
    init: &[f64],
    opts: &NewtonOptions,
) -> Result<OptimResult> {
    if init.len() != obj.dim() {
        return Err(Error::Dimension(format!(
            "initial point has length {}, objective expects {}",
            init.len(),
            obj.dim()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let mut theta = init.to_vec();
    let mut f = obj.value(&theta);
    if !f.is_finite() {
        return Err(Error::Domain("initial point is infeasible".into()));
    }
    let mut g = obj.gradient(&theta);
    let mut max_ridge = 0.0f64;

    let finish = |theta: Vec<f64>, f: f64, gn: f64, it: usize, t: Termination, ridge: f64| {
        OptimResult {
            parameters: theta,
            objective_value: f,
            converged: t == Termination::Converged,
            iterations: it,
            gradient_norm: gn,
            termination: t,
            max_ridge: ridge,
        }
    };

    for iter in 0..opts.max_iter {
        let gn = max_abs(&g);
        if gn <= opts.tol && opts.divergence_bound.is_none() {
            return Ok(finish(theta, f, gn, iter, Termination::Converged, max_ridge));
        }
        if let Some(bound) = opts.divergence_bound {
            if max_abs(&theta) > bound {
                return Ok(finish(theta, f, gn, iter, Termination::Diverged, max_ridge));
            }
        }
        let hess = obj
            .hessian(&theta)
            .unwrap_or_else(|| finite_difference_hessian(obj, &theta));
        let (step, ridge) = damped_solve(&(-hess), &g);
        // A vanishing gradient with a large Newton step means the maximum is
        // at infinity (separation); keep walking until the bound trips.
        if gn <= opts.tol && max_abs(step.as_slice()) <= FLAT_STEP {
            return Ok(finish(theta, f, gn, iter, Termination::Converged, max_ridge));
        }
        max_ridge = max_ridge.max(ridge);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let fc = obj.value(&cand);
            if fc.is_finite() {
                if fc >= f {
                    accepted = Some((cand, fc, None));
                    break;
                }
                // At the optimum a correct step can lose a few ulps of the
                // objective; take it if it is flat to rounding and shrinks the gradient.
                if t == 1.0 && (f - fc) <= 1e-12 * f.abs().max(1.0) {
                    let gc = obj.gradient(&cand);
                    if max_abs(&gc) < gn {
                        accepted = Some((cand, fc, Some(gc)));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, fc, gc)) => {
                theta = cand;
                f = fc;
                g = gc.unwrap_or_else(|| obj.gradient(&theta));
            }
            None => {
                return Ok(finish(theta, f, gn, iter, Termination::LineSearchStalled, max_ridge));
            }
        }
    }
    let gn = max_abs(&g);
    let term = if gn <= opts.tol {
        Termination::Converged
    } else {
        Termination::MaxIterations
    };
    Ok(finish(theta, f, gn, opts.max_iter, term, max_ridge))
}
