//! Plot-ready aggregations of `results.csv`, one table per metric and target
//! family.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use jointrisk::metrics::Metric;
use jointrisk::{Method, Target};

use crate::simulate::{ResultRow, Status};
use crate::stats::Stats;

/// Name prefix of the rare-outcome scenarios.
pub const SENSITIVITY_SCENARIO_PREFIX: &str = "sens_";
/// File prefix for their figure tables.
pub const SENSITIVITY_FILE_PREFIX: &str = "sensitivity_";

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub rho: f64,
    pub method: Method,
    pub target: Target,
    pub stats: Stats,
}

/// A figure table: `{prefix}{joint|marginal}_{metric}.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub file_name: String,
    pub rows: Vec<FigureRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    sensitivity: bool,
    joint: bool,
    metric: Metric,
}

/// Group `ok` rows by (family, metric) and then by (rho, method, target).
/// Values enter each mean in file order.
pub fn figure_tables(rows: &[ResultRow]) -> Vec<FigureTable> {
    type Cell = (u64, Method, Target);
    let mut groups: BTreeMap<Key, BTreeMap<Cell, (f64, Vec<f64>)>> = BTreeMap::new();
    for r in rows {
        if r.status != Status::Ok {
            continue;
        }
        let Some(v) = r.value else { continue };
        let key = Key {
            sensitivity: r.scenario.starts_with(SENSITIVITY_SCENARIO_PREFIX),
            joint: r.target.is_joint(),
            metric: r.metric,
        };
        let cell = (order_key(r.rho), r.method, r.target);
        groups
            .entry(key)
            .or_default()
            .entry(cell)
            .or_insert_with(|| (r.rho, Vec::new()))
            .1
            .push(v);
    }
    groups
        .into_iter()
        .map(|(key, cells)| FigureTable {
            file_name: format!(
                "{}{}_{}.csv",
                if key.sensitivity { SENSITIVITY_FILE_PREFIX } else { "" },
                if key.joint { "joint" } else { "marginal" },
                key.metric.tag()
            ),
            rows: cells
                .into_iter()
                .map(|((_, method, target), (rho, values))| FigureRow {
                    rho,
                    method,
                    target,
                    stats: Stats::of(&values),
                })
                .collect(),
        })
        .collect()
}

/// Total order on f64 that sorts like the numbers themselves.
fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

pub const FIGURE_HEADER: [&str; 8] = ["rho", "method", "target", "n", "mean", "sd", "q2.5", "q97.5"];

pub fn write_figures(dir: &Path, tables: &[FigureTable]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(&t.file_name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(FIGURE_HEADER)?;
        for r in &t.rows {
            let mut rec = vec![r.rho.to_string(), r.method.tag().into(), r.target.tag().into()];
            rec.extend(r.stats.fields());
            w.write_record(&rec)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
