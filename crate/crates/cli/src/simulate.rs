//! The simulation study: scenario grid × iterations × methods.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use jointrisk::datagen::generate_dataset;
use jointrisk::metrics::{evaluate_model, Metric};
use jointrisk::models::fit_method;
use jointrisk::{FitOptions, Method, RngStream, Scenario, SyntheticDataset, Target};
use rayon::prelude::*;

use crate::stats::Stats;

#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub scenarios: Vec<Scenario>,
    pub iterations: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub fit: FitOptions,
}

impl SimulationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            bail!("iterations must be at least 1");
        }
        if self.methods.is_empty() {
            bail!("method set is empty");
        }
        if self.scenarios.is_empty() {
            bail!("no scenarios selected");
        }
        let mut names: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            bail!("scenario list contains duplicates");
        }
        for s in &self.scenarios {
            s.development.validate()?;
            s.validation.validate()?;
        }
        self.fit.gibbs.validate()?;
        Ok(())
    }
}

/// Random stream owned by one (scenario, iteration) task. Keyed by the
/// scenario name so that selecting a different scenario or method subset
/// never changes the data of the others.
pub fn iteration_stream(seed: u64, scenario: &Scenario, iteration: usize) -> RngStream {
    RngStream::new(seed)
        .child(&scenario.name)
        .child_indexed("iteration", iteration as u64)
}

/// Development and validation data for one task.
pub fn iteration_data(
    seed: u64,
    scenario: &Scenario,
    iteration: usize,
) -> jointrisk::Result<(SyntheticDataset, SyntheticDataset)> {
    let stream = iteration_stream(seed, scenario, iteration);
    let dev = generate_dataset(&scenario.development, &mut stream.child("dev-data"))?;
    let val = generate_dataset(&scenario.validation, &mut stream.child("val-data"))?;
    Ok((dev, val))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// Data generation failed.
    DataError,
    FitError,
    EvalError,
    /// The metric evaluated to NaN or infinity.
    NonFinite,
    /// The metric needs generating risks that are not available.
    Unavailable,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::DataError => "data-error",
            Status::FitError => "fit-error",
            Status::EvalError => "eval-error",
            Status::NonFinite => "non-finite",
            Status::Unavailable => "unavailable",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Status {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Status::Ok,
            Status::DataError,
            Status::FitError,
            Status::EvalError,
            Status::NonFinite,
            Status::Unavailable,
        ]
        .into_iter()
        .find(|v| v.tag() == s)
        .ok_or_else(|| anyhow!("unknown status `{s}`"))
    }
}

/// One long-format row of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub rho: f64,
    pub iteration: usize,
    pub method: Method,
    pub target: Target,
    pub metric: Metric,
    pub value: Option<f64>,
    pub status: Status,
}

/// A fit or evaluation failure, kept with its message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub scenario: String,
    pub iteration: usize,
    pub method: Option<Method>,
    pub status: Status,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<Failure>,
}

fn failed_rows(sc: &Scenario, iteration: usize, method: Method, status: Status) -> Vec<ResultRow> {
    let mut rows = Vec::with_capacity(Target::ALL.len() * Metric::ALL.len());
    for target in Target::ALL {
        for metric in Metric::ALL {
            rows.push(ResultRow {
                scenario: sc.name.clone(),
                rho: sc.rho,
                iteration,
                method,
                target,
                metric,
                value: None,
                status,
            });
        }
    }
    rows
}

/// Fit every method on one development set and score it on the paired
/// validation set. A failing method yields rows flagged with its status.
pub fn run_iteration(plan: &SimulationPlan, sc: &Scenario, iteration: usize) -> SimulationOutput {
    let mut out = SimulationOutput::default();
    let fail = |out: &mut SimulationOutput, method: Option<Method>, status, message: String| {
        log::warn!("{} iteration {iteration} {:?}: {message}", sc.name, method);
        out.failures.push(Failure {
            scenario: sc.name.clone(),
            iteration,
            method,
            status,
            message,
        });
    };
    let (dev, val) = match iteration_data(plan.seed, sc, iteration) {
        Ok(d) => d,
        Err(e) => {
            fail(&mut out, None, Status::DataError, e.to_string());
            for &m in &plan.methods {
                out.rows.extend(failed_rows(sc, iteration, m, Status::DataError));
            }
            return out;
        }
    };
    let stream = iteration_stream(plan.seed, sc, iteration);
    for &method in &plan.methods {
        let d = &dev.data;
        let model = match fit_method(method, &d.x, &d.y1, &d.y2, &plan.fit, &stream) {
            Ok(m) => m,
            Err(e) => {
                fail(&mut out, Some(method), Status::FitError, e.to_string());
                out.rows.extend(failed_rows(sc, iteration, method, Status::FitError));
                continue;
            }
        };
        let report = model
            .predict_batch(&val.data.x)
            .and_then(|p| evaluate_model(&p.risks, &val.data.y1, &val.data.y2, Some(&val.truth)));
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                fail(&mut out, Some(method), Status::EvalError, e.to_string());
                out.rows.extend(failed_rows(sc, iteration, method, Status::EvalError));
                continue;
            }
        };
        for tm in &report.targets {
            for metric in Metric::ALL {
                let (value, status) = match tm.get(metric) {
                    Some(v) if v.is_finite() => (Some(v), Status::Ok),
                    Some(_) => (None, Status::NonFinite),
                    None => (None, Status::Unavailable),
                };
                out.rows.push(ResultRow {
                    scenario: sc.name.clone(),
                    rho: sc.rho,
                    iteration,
                    method,
                    target: tm.target,
                    metric,
                    value,
                    status,
                });
            }
        }
    }
    out
}

/// Run the whole plan. Tasks run in parallel; the output order depends only
/// on the plan.
pub fn run_simulation(plan: &SimulationPlan) -> Result<SimulationOutput> {
    plan.validate()?;
    let tasks: Vec<(usize, usize)> = (0..plan.scenarios.len())
        .flat_map(|s| (0..plan.iterations).map(move |i| (s, i)))
        .collect();
    let mut parts: Vec<(usize, usize, SimulationOutput)> = tasks
        .into_par_iter()
        .map(|(s, i)| {
            let out = run_iteration(plan, &plan.scenarios[s], i);
            log::info!("{} iteration {i} done", plan.scenarios[s].name);
            (s, i, out)
        })
        .collect();
    parts.sort_by_key(|p| (p.0, p.1));
    let mut out = SimulationOutput::default();
    for (_, _, mut part) in parts {
        part.rows.sort_by_key(|r| (r.method, r.target, r.metric));
        out.rows.append(&mut part.rows);
        out.failures.append(&mut part.failures);
    }
    Ok(out)
}

pub const RESULTS_HEADER: [&str; 8] =
    ["scenario", "rho", "iteration", "method", "target", "metric", "value", "status"];

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.rho.to_string(),
            r.iteration.to_string(),
            r.method.tag().to_string(),
            r.target.tag().to_string(),
            r.metric.tag().to_string(),
            r.value.map(|v| v.to_string()).unwrap_or_default(),
            r.status.tag().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open results {}", path.display()))?;
    let headers: Vec<&str> = reader.headers()?.iter().collect();
    if headers != RESULTS_HEADER {
        bail!("results header must be `{}`, found `{}`", RESULTS_HEADER.join(","), headers.join(","));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let rec = record?;
        let ctx = || format!("results row {}", k + 1);
        let value = match &rec[6] {
            "" => None,
            v => Some(v.parse::<f64>().with_context(ctx)?),
        };
        rows.push(ResultRow {
            scenario: rec[0].to_string(),
            rho: rec[1].parse().with_context(ctx)?,
            iteration: rec[2].parse().with_context(ctx)?,
            method: rec[3].parse().map_err(anyhow::Error::from).with_context(ctx)?,
            target: rec[4].parse().map_err(anyhow::Error::from).with_context(ctx)?,
            metric: rec[5].parse().map_err(anyhow::Error::from).with_context(ctx)?,
            value,
            status: rec[7].parse().with_context(ctx)?,
        });
    }
    Ok(rows)
}

pub fn write_failures(path: &Path, failures: &[Failure]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scenario", "iteration", "method", "status", "message"])?;
    for f in failures {
        w.write_record([
            f.scenario.clone(),
            f.iteration.to_string(),
            f.method.map(|m| m.tag().to_string()).unwrap_or_default(),
            f.status.tag().to_string(),
            f.message.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per (scenario, method, target, metric) statistics over iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub rho: f64,
    pub method: Method,
    pub target: Target,
    pub metric: Metric,
    /// Rows whose status is not `ok`.
    pub failures: usize,
    pub stats: Stats,
}

/// Scenarios keep their first-appearance order; within a scenario rows are
/// ordered by method, target and metric.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, f64)> = Vec::new();
    let mut groups: BTreeMap<(usize, Method, Target, Metric), (Vec<f64>, usize)> = BTreeMap::new();
    for r in rows {
        let s = match order.iter().position(|(n, _)| *n == r.scenario) {
            Some(s) => s,
            None => {
                order.push((r.scenario.clone(), r.rho));
                order.len() - 1
            }
        };
        let g = groups.entry((s, r.method, r.target, r.metric)).or_default();
        match (r.status, r.value) {
            (Status::Ok, Some(v)) => g.0.push(v),
            _ => g.1 += 1,
        }
    }
    groups
        .into_iter()
        .map(|((s, method, target, metric), (values, failures))| SummaryRow {
            scenario: order[s].0.clone(),
            rho: order[s].1,
            method,
            target,
            metric,
            failures,
            stats: Stats::of(&values),
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut header = vec!["scenario", "rho", "method", "target", "metric", "failures"];
    header.extend(Stats::HEADER);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.scenario.clone(),
            r.rho.to_string(),
            r.method.tag().to_string(),
            r.target.tag().to_string(),
            r.metric.tag().to_string(),
            r.failures.to_string(),
        ];
        rec.extend(r.stats.fields());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
