//! CSV readers and writers for datasets and predictions.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use jointrisk::{Dataset, JointRisk, SyntheticTruth};
use nalgebra::DMatrix;

pub const TRUTH_COLUMNS: [&str; 4] = ["true_p11", "true_p10", "true_p01", "true_p00"];
pub const PREDICTION_COLUMNS: [&str; 6] = ["p11", "p10", "p01", "p00", "py1", "py2"];

/// A dataset read from disk, with generating risks when the file carries them.
#[derive(Debug, Clone)]
pub struct DataFile {
    pub dataset: Dataset,
    pub truth: Option<SyntheticTruth>,
}

fn parse_number(field: &str, column: &str, row: usize) -> Result<f64> {
    let field = field.trim();
    if field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan") {
        bail!("missing value in column `{column}` at data row {row}");
    }
    let v: f64 = field
        .parse()
        .with_context(|| format!("column `{column}` at data row {row}: cannot parse `{field}`"))?;
    if !v.is_finite() {
        bail!("column `{column}` at data row {row}: value `{field}` is not finite");
    }
    Ok(v)
}

fn parse_outcome(field: &str, column: &str, row: usize) -> Result<bool> {
    match field.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        "" => bail!("missing value in column `{column}` at data row {row}"),
        other => bail!("column `{column}` at data row {row}: expected 0 or 1, got `{other}`"),
    }
}

/// Read `x1,...,xP,y1,y2[,true_p11,true_p10,true_p01,true_p00]`.
///
/// Every column other than the outcomes and truth columns is a covariate, in
/// file order.
pub fn read_dataset(path: &Path) -> Result<DataFile> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open dataset {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let iy1 = find("y1").ok_or_else(|| anyhow!("dataset has no `y1` column"))?;
    let iy2 = find("y2").ok_or_else(|| anyhow!("dataset has no `y2` column"))?;
    let truth_idx: Vec<Option<usize>> = TRUTH_COLUMNS.iter().map(|c| find(c)).collect();
    let has_truth = match truth_idx.iter().filter(|i| i.is_some()).count() {
        0 => false,
        4 => true,
        _ => bail!("truth columns must all be present: {}", TRUTH_COLUMNS.join(", ")),
    };
    let covariates: Vec<usize> = (0..headers.len())
        .filter(|&j| j != iy1 && j != iy2 && !truth_idx.contains(&Some(j)))
        .collect();
    if covariates.is_empty() {
        bail!("dataset has no covariate columns");
    }

    let mut values = Vec::new();
    let (mut y1, mut y2, mut joint) = (Vec::new(), Vec::new(), Vec::new());
    for (r, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("malformed CSV at data row {}", r + 1))?;
        let row = r + 1;
        for &j in &covariates {
            values.push(parse_number(&record[j], &headers[j], row)?);
        }
        y1.push(parse_outcome(&record[iy1], "y1", row)?);
        y2.push(parse_outcome(&record[iy2], "y2", row)?);
        if has_truth {
            let mut cells = [0.0; 4];
            for (k, idx) in truth_idx.iter().enumerate() {
                cells[k] = parse_number(&record[idx.unwrap()], TRUTH_COLUMNS[k], row)?;
            }
            joint.push(JointRisk::from_array(cells));
        }
    }
    if y1.is_empty() {
        bail!("dataset {} has no rows", path.display());
    }
    let x = DMatrix::from_row_slice(y1.len(), covariates.len(), &values);
    let names = covariates.iter().map(|&j| headers[j].clone()).collect();
    Ok(DataFile {
        dataset: Dataset::with_names(x, y1, y2, names)?,
        truth: has_truth.then(|| SyntheticTruth::from_joint(joint)),
    })
}

pub fn write_dataset(path: &Path, data: &Dataset, truth: Option<&SyntheticTruth>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut header: Vec<&str> = data.covariate_names.iter().map(String::as_str).collect();
    header.extend(["y1", "y2"]);
    if truth.is_some() {
        header.extend(TRUTH_COLUMNS);
    }
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = data.x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push((data.y1[i] as u8).to_string());
        rec.push((data.y2[i] as u8).to_string());
        if let Some(t) = truth {
            rec.extend(t.joint[i].as_array().iter().map(|v| v.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_predictions(path: &Path, risks: &[JointRisk]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(PREDICTION_COLUMNS)?;
    for r in risks {
        let row = [r.p11, r.p10, r.p01, r.p00, r.marginal1(), r.marginal2()];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Read the four joint cells of a prediction file; marginal columns are
/// checked against them rather than trusted.
pub fn read_predictions(path: &Path) -> Result<Vec<JointRisk>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open predictions {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let idx: Vec<usize> = PREDICTION_COLUMNS[..4]
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| anyhow!("prediction file has no `{c}` column"))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let mut cells = [0.0; 4];
        for (k, &j) in idx.iter().enumerate() {
            cells[k] = parse_number(&record[j], PREDICTION_COLUMNS[k], r + 1)?;
        }
        out.push(JointRisk::from_array(cells));
    }
    Ok(out)
}
