//! Scoring prediction files and the hold-out fit-and-evaluate path.

use anyhow::{bail, Result};
use jointrisk::metrics::evaluate_model;
use jointrisk::models::fit_method;
use jointrisk::{FitOptions, JointRisk, Method, MetricsReport, RngStream, SyntheticTruth};

use crate::io::DataFile;

/// Score `preds` against the outcomes in `data`. With `use_truth` the file
/// must carry generating risks and MSE is reported.
pub fn evaluate_predictions(preds: &[JointRisk], data: &DataFile, use_truth: bool) -> Result<MetricsReport> {
    if preds.len() != data.dataset.n() {
        bail!(
            "prediction file has {} rows but the dataset has {}",
            preds.len(),
            data.dataset.n()
        );
    }
    let truth = truth_if(data, use_truth)?;
    Ok(evaluate_model(preds, &data.dataset.y1, &data.dataset.y2, truth)?)
}

fn truth_if(data: &DataFile, use_truth: bool) -> Result<Option<&SyntheticTruth>> {
    match (use_truth, &data.truth) {
        (false, _) => Ok(None),
        (true, Some(t)) => Ok(Some(t)),
        (true, None) => bail!(
            "missing truth columns: {}",
            crate::io::TRUTH_COLUMNS.join(", ")
        ),
    }
}

/// Random split of `0..n` into (development, hold-out) index sets, each in
/// ascending order. The hold-out share is `fraction` of the rows, rounded.
pub fn holdout_split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        bail!("hold-out fraction must lie in (0, 1), got {fraction}");
    }
    let n_test = (n as f64 * fraction).round() as usize;
    if n_test == 0 || n_test == n {
        bail!("hold-out fraction {fraction} leaves an empty partition of {n} rows");
    }
    let mut idx: Vec<usize> = (0..n).collect();
    RngStream::new(seed).child("holdout").shuffle(&mut idx);
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Fit `method` on the development part of a random split and score it on
/// the hold-out part.
pub fn holdout_evaluate(
    data: &DataFile,
    method: Method,
    fraction: f64,
    seed: u64,
    opts: &FitOptions,
    use_truth: bool,
) -> Result<MetricsReport> {
    let (train, test) = holdout_split(data.dataset.n(), fraction, seed)?;
    let dev = data.dataset.subset(&train);
    let val = data.dataset.subset(&test);
    let truth = truth_if(data, use_truth)?
        .map(|t| SyntheticTruth::from_joint(test.iter().map(|&i| t.joint[i]).collect()));
    let model = fit_method(method, &dev.x, &dev.y1, &dev.y2, opts, &RngStream::new(seed))?;
    let preds = model.predict_batch(&val.x)?;
    let mut report = evaluate_model(&preds.risks, &val.y1, &val.y2, truth.as_ref())?;
    report.method = Some(method.tag().to_string());
    Ok(report)
}
