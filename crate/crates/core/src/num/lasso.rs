//! L1-penalized logistic regression by coordinate descent.
//!
//! Minimizes `-(1/n)·loglik(β0, β) + λ·Σ_{j penalized} |β_j|` with the usual
//! IRLS outer loop (quadratic approximation of the log-likelihood) and cyclic
//! coordinate descent with soft thresholding on the inner penalized weighted
//! least-squares problem. The intercept is never penalized. Columns are used
//! on their raw scale (no internal standardization).

use nalgebra::DMatrix;

use super::rng::RngStream;
use super::special::{expit, log_expit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LassoOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Convergence threshold on the largest coefficient change.
    pub tol: f64,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            max_outer: 200,
            max_inner: 100_000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub outer_iterations: usize,
}

impl LassoFit {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }

    pub fn penalized_l1(&self, unpenalized: &[usize]) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(j, _)| !unpenalized.contains(j))
            .map(|(_, b)| b.abs())
            .sum()
    }
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

fn check_inputs(x: &DMatrix<f64>, y: &[bool], lambda: f64) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "lasso design has {} rows, outcome has {}",
            x.nrows(),
            y.len()
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite and ≥ 0, got {lambda}")));
    }
    let events = y.iter().filter(|&&v| v).count();
    if events == 0 || events == y.len() {
        return Err(Error::SingleClass("lasso outcome".into()));
    }
    Ok(())
}

/// Smallest λ at which every penalized coefficient is zero when only the
/// intercept is unpenalized: `max_j |X_jᵀ(y − ȳ)| / n`.
pub fn lambda_max(x: &DMatrix<f64>, y: &[bool]) -> f64 {
    let n = y.len() as f64;
    let ybar = y.iter().filter(|&&v| v).count() as f64 / n;
    (0..x.ncols())
        .map(|j| {
            x.column(j)
                .iter()
                .zip(y)
                .map(|(xv, &yi)| xv * (yi as u8 as f64 - ybar))
                .sum::<f64>()
                .abs()
                / n
        })
        .fold(0.0, f64::max)
}

/// Fit at a single λ. Columns listed in `unpenalized` carry no penalty.
pub fn lasso_logistic(
    x: &DMatrix<f64>,
    y: &[bool],
    unpenalized: &[usize],
    lambda: f64,
) -> Result<LassoFit> {
    lasso_logistic_warm(x, y, unpenalized, lambda, None, &LassoOptions::default())
}

/// [`lasso_logistic`] with a warm start and explicit options.
pub fn lasso_logistic_warm(
    x: &DMatrix<f64>,
    y: &[bool],
    unpenalized: &[usize],
    lambda: f64,
    start: Option<&LassoFit>,
    opts: &LassoOptions,
) -> Result<LassoFit> {
    check_inputs(x, y, lambda)?;
    let n = y.len();
    let nf = n as f64;
    let p = x.ncols();
    let dim = p + 1;
    let pen: Vec<bool> = (0..p).map(|j| !unpenalized.contains(&j)).collect();
    // Row-major copy with a leading intercept column.
    let mut rows = vec![1.0; n * dim];
    for i in 0..n {
        for j in 0..p {
            rows[i * dim + j + 1] = x[(i, j)];
        }
    }
    let predict = |theta: &[f64], eta: &mut [f64]| {
        for (i, e) in eta.iter_mut().enumerate() {
            let r = &rows[i * dim..(i + 1) * dim];
            *e = r.iter().zip(theta).map(|(a, b)| a * b).sum();
        }
    };
    let objective = |theta: &[f64], eta: &[f64]| {
        let nll: f64 = eta
            .iter()
            .zip(y)
            .map(|(&e, &yi)| if yi { -log_expit(e) } else { -log_expit(-e) })
            .sum();
        let l1: f64 = theta[1..]
            .iter()
            .zip(&pen)
            .filter(|(_, &q)| q)
            .map(|(b, _)| b.abs())
            .sum();
        nll / nf + lambda * l1
    };

    let mut theta: Vec<f64> = match start {
        Some(s) if s.coefficients.len() == p => {
            std::iter::once(s.intercept).chain(s.coefficients.iter().copied()).collect()
        }
        _ => {
            let ybar = y.iter().filter(|&&v| v).count() as f64 / nf;
            let mut t = vec![0.0; dim];
            t[0] = (ybar / (1.0 - ybar)).ln();
            t
        }
    };
    let mut eta = vec![0.0; n];
    predict(&theta, &mut eta);
    let mut obj = objective(&theta, &eta);
    let mut cand_eta = vec![0.0; n];
    let mut gram = vec![0.0; dim * dim];
    let mut moment = vec![0.0; dim];

    for outer in 1..=opts.max_outer {
        // Weighted Gram matrix and moment vector of the IRLS working response.
        gram.iter_mut().for_each(|v| *v = 0.0);
        moment.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let pi = expit(eta[i]);
            let w = (pi * (1.0 - pi)).max(1e-5);
            let z = eta[i] + (y[i] as u8 as f64 - pi) / w;
            let r = &rows[i * dim..(i + 1) * dim];
            for a in 0..dim {
                let wa = w * r[a];
                moment[a] += wa * z;
                for c in 0..=a {
                    gram[a * dim + c] += wa * r[c];
                }
            }
        }
        for a in 0..dim {
            moment[a] /= nf;
            for c in 0..=a {
                gram[a * dim + c] /= nf;
                gram[c * dim + a] = gram[a * dim + c];
            }
        }

        let old = theta.clone();
        let mut next = theta.clone();
        let mut inner_ok = false;
        for _ in 0..opts.max_inner {
            let mut max_delta = 0.0f64;
            for j in 0..dim {
                let gjj = gram[j * dim + j];
                if gjj <= 0.0 {
                    continue;
                }
                let cross: f64 = (0..dim).map(|l| gram[j * dim + l] * next[l]).sum();
                let grad = moment[j] - cross + gjj * next[j];
                let new = if j > 0 && pen[j - 1] {
                    soft_threshold(grad, lambda) / gjj
                } else {
                    grad / gjj
                };
                max_delta = max_delta.max((new - next[j]).abs() * gjj.sqrt());
                next[j] = new;
            }
            if max_delta < 0.1 * opts.tol {
                inner_ok = true;
                break;
            }
        }
        if !inner_ok {
            log::debug!("lasso inner loop hit its iteration cap at lambda={lambda}");
        }

        // backtrack towards the previous iterate if the quadratic model overshot
        let mut t = 1.0;
        let mut cand = next.clone();
        predict(&cand, &mut cand_eta);
        let mut new_obj = objective(&cand, &cand_eta);
        while new_obj > obj + 1e-15 * obj.abs() && t > 1e-8 {
            t *= 0.5;
            for j in 0..dim {
                cand[j] = old[j] + t * (next[j] - old[j]);
            }
            predict(&cand, &mut cand_eta);
            new_obj = objective(&cand, &cand_eta);
        }
        let change = cand.iter().zip(&old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        theta = cand;
        std::mem::swap(&mut eta, &mut cand_eta);
        obj = new_obj.min(obj);
        if change < opts.tol {
            return Ok(LassoFit {
                intercept: theta[0],
                coefficients: theta[1..].to_vec(),
                lambda,
                outer_iterations: outer,
            });
        }
    }
    Err(Error::NonConvergence(format!(
        "lasso did not converge in {} outer iterations at lambda={lambda}",
        opts.max_outer
    )))
}

/// Log-spaced descending grid from `lambda_max` to `lambda_max·min_ratio`.
pub fn lambda_grid(lambda_max: f64, min_ratio: f64, len: usize) -> Vec<f64> {
    if len <= 1 {
        return vec![lambda_max];
    }
    let (hi, lo) = (lambda_max.ln(), (lambda_max * min_ratio).ln());
    (0..len)
        .map(|k| (hi + (lo - hi) * k as f64 / (len - 1) as f64).exp())
        .collect()
}

/// Stratified fold assignment: cases and controls are shuffled separately and
/// dealt round-robin, so every fold sees both classes whenever possible.
pub fn stratified_folds(y: &[bool], folds: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        rng.shuffle(&mut idx);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

fn bernoulli_deviance(eta: f64, y: bool) -> f64 {
    -2.0 * if y { log_expit(eta) } else { log_expit(-eta) }
}

#[derive(Debug, Clone)]
pub struct CvResult {
    pub lambda: f64,
    pub mean_deviance: Vec<f64>,
    pub folds_used: usize,
}

/// Choose λ from a descending grid by minimum mean out-of-fold deviance.
pub fn cv_select_lambda(
    x: &DMatrix<f64>,
    y: &[bool],
    folds: usize,
    grid: &[f64],
    rng: &mut RngStream,
) -> Result<f64> {
    cv_lambda_path(x, y, &[], folds, grid, rng).map(|r| r.lambda)
}

/// Cross-validated deviance along the whole grid.
pub fn cv_lambda_path(
    x: &DMatrix<f64>,
    y: &[bool],
    unpenalized: &[usize],
    folds: usize,
    grid: &[f64],
    rng: &mut RngStream,
) -> Result<CvResult> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Config("lambda grid must be sorted descending".into()));
    }
    if grid.len() == 1 {
        return Ok(CvResult {
            lambda: grid[0],
            mean_deviance: vec![f64::NAN],
            folds_used: 0,
        });
    }
    let assignment = stratified_folds(y, folds, rng);
    let mut total = vec![0.0; grid.len()];
    let mut used = 0;
    for fold in 0..folds {
        let train: Vec<usize> = (0..y.len()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..y.len()).filter(|&i| assignment[i] == fold).collect();
        let ytr: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let yte: Vec<bool> = test.iter().map(|&i| y[i]).collect();
        let single = |v: &[bool]| v.iter().all(|&a| a) || v.iter().all(|&a| !a);
        if test.is_empty() || single(&ytr) || single(&yte) {
            log::warn!("cross-validation fold {fold} has a single outcome class; skipped");
            continue;
        }
        let xtr = x.select_rows(&train);
        let xte = x.select_rows(&test);
        let mut warm: Option<LassoFit> = None;
        for (k, &lambda) in grid.iter().enumerate() {
            let fit = lasso_logistic_warm(
                &xtr,
                &ytr,
                unpenalized,
                lambda,
                warm.as_ref(),
                &LassoOptions::default(),
            )?;
            let dev: f64 = (0..test.len())
                .map(|i| {
                    let eta = fit.intercept
                        + (0..xte.ncols()).map(|j| fit.coefficients[j] * xte[(i, j)]).sum::<f64>();
                    bernoulli_deviance(eta, yte[i])
                })
                .sum::<f64>()
                / test.len() as f64;
            total[k] += dev;
            warm = Some(fit);
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::SingleClass("every cross-validation fold".into()));
    }
    let mean: Vec<f64> = total.iter().map(|t| t / used as f64).collect();
    let best = mean
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
        .0;
    Ok(CvResult {
        lambda: grid[best],
        mean_deviance: mean,
        folds_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::{fit_logistic, with_intercept};

    fn simulate(n: usize, coefs: &[f64], seed: u64) -> (DMatrix<f64>, Vec<bool>) {
        let mut rng = RngStream::new(seed);
        let p = coefs.len() - 1;
        let x = DMatrix::from_fn(n, p, |_, _| rng.standard_normal());
        let y = (0..n)
            .map(|i| {
                let eta = coefs[0] + (0..p).map(|j| coefs[j + 1] * x[(i, j)]).sum::<f64>();
                rng.bernoulli(expit(eta))
            })
            .collect();
        (x, y)
    }

    fn linear_predictors(x: &DMatrix<f64>, b0: f64, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![b0; x.nrows()];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (e, xv) in eta.iter_mut().zip(x.column(j).iter()) {
                    *e += b * xv;
                }
            }
        }
        eta
    }

    /// Subgradient optimality conditions of the penalized objective.
    fn kkt_violation(x: &DMatrix<f64>, y: &[bool], fit: &LassoFit) -> f64 {
        let n = y.len() as f64;
        let eta = linear_predictors(x, fit.intercept, &fit.coefficients);
        let resid: Vec<f64> = eta
            .iter()
            .zip(y)
            .map(|(&e, &yi)| yi as u8 as f64 - expit(e))
            .collect();
        let mut worst = (resid.iter().sum::<f64>() / n).abs();
        for j in 0..x.ncols() {
            let s = x.column(j).iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>() / n;
            let b = fit.coefficients[j];
            let v = if b != 0.0 {
                (s - fit.lambda * b.signum()).abs()
            } else {
                (s.abs() - fit.lambda).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    #[test]
    fn lambda_zero_matches_newton_mle() {
        let (x, y) = simulate(2000, &[-0.5, 0.8, -0.4, 0.0], 1);
        let fit = lasso_logistic(&x, &y, &[], 0.0).unwrap();
        let (mle, _) = fit_logistic(&with_intercept(&x), &y, None, "y").unwrap();
        assert!((fit.intercept - mle[0]).abs() < 1e-5);
        for j in 0..3 {
            assert!((fit.coefficients[j] - mle[j + 1]).abs() < 1e-5);
        }
    }

    #[test]
    fn kkt_conditions_hold() {
        let (x, y) = simulate(1500, &[0.2, 1.0, 0.5, 0.0, -0.3], 2);
        let lmax = lambda_max(&x, &y);
        for &frac in &[0.5, 0.1, 0.01] {
            let fit = lasso_logistic(&x, &y, &[], frac * lmax).unwrap();
            assert!(kkt_violation(&x, &y, &fit) < 1e-6);
        }
    }

    #[test]
    fn lambda_max_zeroes_everything() {
        let (x, y) = simulate(1000, &[-1.0, 0.7, 0.3], 3);
        let lmax = lambda_max(&x, &y);
        let fit = lasso_logistic(&x, &y, &[], lmax).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        let ybar = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
        assert!((expit(fit.intercept) - ybar).abs() < 1e-10);
        // just below the threshold something enters
        let fit = lasso_logistic(&x, &y, &[], 0.95 * lmax).unwrap();
        assert!(fit.coefficients.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn l1_norm_non_increasing_along_path() {
        let (x, y) = simulate(1000, &[0.0, 0.5, -0.5, 0.25, 0.0], 4);
        let grid = lambda_grid(lambda_max(&x, &y), 1e-3, 30);
        let mut prev = f64::INFINITY;
        for &lambda in grid.iter().rev() {
            let l1 = lasso_logistic(&x, &y, &[], lambda).unwrap().penalized_l1(&[]);
            assert!(l1 <= prev + 1e-8);
            prev = l1;
        }
    }

    #[test]
    fn duplicate_column_leaves_predictions_unchanged() {
        let (x, y) = simulate(1000, &[-0.3, 0.9, 0.4], 5);
        let mut dup = x.clone().insert_column(2, 0.0);
        dup.set_column(2, &x.column(0));
        let lambda = 0.01;
        let a = lasso_logistic(&x, &y, &[], lambda).unwrap();
        let b = lasso_logistic(&dup, &y, &[], lambda).unwrap();
        for i in 0..x.nrows() {
            let pa = expit(a.linear_predictor(&[x[(i, 0)], x[(i, 1)]]));
            let pb = expit(b.linear_predictor(&[dup[(i, 0)], dup[(i, 1)], dup[(i, 2)]]));
            assert!((pa - pb).abs() < 1e-4);
        }
    }

    #[test]
    fn unpenalized_columns_escape_shrinkage() {
        let (x, y) = simulate(1000, &[-0.3, 0.9, 0.4], 6);
        let fit = lasso_logistic(&x, &y, &[0], 10.0).unwrap();
        assert!(fit.coefficients[0].abs() > 0.5);
        assert_eq!(fit.coefficients[1], 0.0);
    }

    #[test]
    fn cv_single_grid_and_determinism() {
        let (x, y) = simulate(500, &[-0.5, 0.5, 0.0], 7);
        let mut rng = RngStream::new(1);
        assert_eq!(cv_select_lambda(&x, &y, 5, &[0.05], &mut rng).unwrap(), 0.05);
        let grid = lambda_grid(lambda_max(&x, &y), 1e-3, 20);
        let a = cv_select_lambda(&x, &y, 10, &grid, &mut RngStream::new(9)).unwrap();
        let b = cv_select_lambda(&x, &y, 10, &grid, &mut RngStream::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(cv_select_lambda(&x, &y, 1, &grid, &mut rng).is_err());
        let ascending: Vec<f64> = grid.iter().rev().copied().collect();
        assert!(cv_select_lambda(&x, &y, 5, &ascending, &mut rng).is_err());
    }

    #[test]
    fn cv_shrinks_pure_noise() {
        let (x, y) = simulate(2000, &[-0.4, 0.0, 0.0, 0.0, 0.0, 0.0], 8);
        let grid = lambda_grid(lambda_max(&x, &y), 1e-4, 50);
        let lambda = cv_select_lambda(&x, &y, 10, &grid, &mut RngStream::new(3)).unwrap();
        let fit = lasso_logistic(&x, &y, &[], lambda).unwrap();
        assert!(fit.coefficients.iter().all(|b| b.abs() < 0.05), "{:?}", fit.coefficients);
    }

    #[test]
    fn stratified_folds_balance_classes() {
        let y: Vec<bool> = (0..103).map(|i| i % 17 == 0).collect();
        let folds = stratified_folds(&y, 5, &mut RngStream::new(2));
        for f in 0..5 {
            let cases = (0..y.len()).filter(|&i| folds[i] == f && y[i]).count();
            assert!(cases >= 1);
        }
    }
}
