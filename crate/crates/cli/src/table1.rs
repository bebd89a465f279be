//! Pooled outcome correlation and joint event rates per rho.

use std::path::Path;

use anyhow::{Context, Result};
use jointrisk::datagen::{
    base_grid, generate_dataset, sensitivity_grid, OutcomeCounts, OutcomeSummary,
};
use jointrisk::Scenario;
use rayon::prelude::*;

use crate::simulate::iteration_stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub rho: f64,
    pub summary: OutcomeSummary,
}

/// Pool the development datasets of every iteration. The data are drawn from
/// the same streams the simulation uses, so the table describes exactly the
/// samples the models were developed on.
pub fn table1_for(scenarios: &[Scenario], seed: u64, iterations: usize) -> Result<Vec<Table1Row>> {
    scenarios
        .iter()
        .map(|sc| {
            let counts = (0..iterations)
                .into_par_iter()
                .map(|it| {
                    let mut rng = iteration_stream(seed, sc, it).child("dev-data");
                    let d = generate_dataset(&sc.development, &mut rng)?;
                    let mut c = OutcomeCounts::default();
                    c.add(&d.data.y1, &d.data.y2);
                    Ok(c)
                })
                .collect::<jointrisk::Result<Vec<_>>>()?;
            let mut total = OutcomeCounts::default();
            for c in counts {
                total.n11 += c.n11;
                total.n10 += c.n10;
                total.n01 += c.n01;
                total.n00 += c.n00;
            }
            Ok(Table1Row { rho: sc.rho, summary: total.summary() })
        })
        .collect()
}

pub fn table1(seed: u64, iterations: usize, sensitivity: bool) -> Result<Vec<Table1Row>> {
    let grid = if sensitivity { sensitivity_grid() } else { base_grid() };
    table1_for(&grid, seed, iterations)
}

pub fn write_table1(path: &Path, rows: &[Table1Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["rho", "corr", "p11", "p10", "p01", "prevalence1", "prevalence2", "n"])?;
    for r in rows {
        let s = &r.summary;
        w.write_record([
            r.rho.to_string(),
            format!("{:.3}", s.corr),
            format!("{:.3}", s.p11),
            format!("{:.3}", s.p10),
            format!("{:.3}", s.p01),
            format!("{:.3}", s.prevalence1),
            format!("{:.3}", s.prevalence2),
            s.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
