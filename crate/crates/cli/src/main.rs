use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jointrisk::datagen::{base_grid, generate_dataset, scenario_for, sensitivity_grid, GenConfig};
use jointrisk::models::probit::GibbsConfig;
use jointrisk::models::{fit_method, LambdaPolicy};
use jointrisk::{FitOptions, Method, RngStream};
use jointrisk_cli::evaluate::{evaluate_predictions, holdout_evaluate};
use jointrisk_cli::figures::{figure_tables, write_figures};
use jointrisk_cli::io::{read_dataset, read_predictions, write_dataset, write_predictions};
use jointrisk_cli::simulate::{
    read_results, summarize, write_failures, write_results, write_summary,
};
use jointrisk_cli::table1::{table1, write_table1};
use jointrisk_cli::{run_simulation, ModelFile, SimulationPlan};

#[derive(Parser)]
#[command(name = "jointrisk", version, about = "Joint risk prediction for two binary outcomes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation study and write results.csv and summary.csv.
    Simulate(SimulateArgs),
    /// Pooled outcome correlation and joint event rates per rho.
    Table1 {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Use the rare-outcome intercepts.
        #[arg(long)]
        sensitivity: bool,
        #[arg(long, default_value = "table1.csv")]
        out: PathBuf,
    },
    /// Write a synthetic dataset with its generating risks.
    Generate {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long)]
        sensitivity: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one method to a dataset CSV and save the model as JSON.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict joint and marginal risks for every row of a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions, or fit and score on a random hold-out split.
    Evaluate {
        /// Prediction CSV aligned with --data.
        #[arg(long, conflicts_with = "holdout")]
        pred: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        /// Report MSE against the true_* columns of --data.
        #[arg(long)]
        truth: bool,
        /// Hold out this share of rows, fit --method on the rest and score.
        #[arg(long, requires = "method")]
        holdout: Option<f64>,
        #[arg(long)]
        method: Option<Method>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate results.csv into plot-ready tables.
    Figures {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Shorter probit chain: 2,000 draws with 1,000 burn-in.
    #[arg(long)]
    fast_mpm: bool,
    /// Fixed second-stage lasso penalty for sr instead of cross-validation.
    #[arg(long)]
    lambda: Option<f64>,
}

impl FitArgs {
    fn options(&self) -> FitOptions {
        fit_options(self.fast_mpm, self.lambda)
    }
}

fn fit_options(fast_mpm: bool, lambda: Option<f64>) -> FitOptions {
    FitOptions {
        gibbs: if fast_mpm { GibbsConfig::fast() } else { GibbsConfig::default() },
        lambda: lambda.map(LambdaPolicy::Fixed).unwrap_or_default(),
        ..Default::default()
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// Comma-separated rho values; defaults to 0,0.25,0.5,0.75,0.95.
    #[arg(long, value_delimiter = ',')]
    rho_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "univariate,sr,pcc,mlr,mlm,mpm")]
    methods: Vec<Method>,
    /// Also run the rare-outcome scenarios.
    #[arg(long)]
    sensitivity: bool,
    #[arg(long)]
    fast_mpm: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if let Some(t) = a.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut scenarios = match &a.rho_list {
        Some(list) => list.iter().map(|&r| scenario_for(r, false)).collect(),
        None => base_grid(),
    };
    if a.sensitivity {
        match &a.rho_list {
            Some(list) => scenarios.extend(list.iter().map(|&r| scenario_for(r, true))),
            None => scenarios.extend(sensitivity_grid()),
        }
    }
    let mut methods = a.methods.clone();
    methods.sort();
    methods.dedup();
    let plan = SimulationPlan {
        scenarios,
        iterations: a.iterations,
        methods,
        seed: a.seed,
        fit: fit_options(a.fast_mpm, None),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let out = run_simulation(&plan)?;
    write_results(&a.out.join("results.csv"), &out.rows)?;
    write_summary(&a.out.join("summary.csv"), &summarize(&out.rows))?;
    write_failures(&a.out.join("failures.csv"), &out.failures)?;
    eprintln!(
        "{} rows, {} failures written to {}",
        out.rows.len(),
        out.failures.len(),
        a.out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a)?,
        Command::Table1 { seed, iterations, sensitivity, out } => {
            if iterations == 0 {
                bail!("iterations must be at least 1");
            }
            let rows = table1(seed, iterations, sensitivity)?;
            write_table1(&out, &rows)?;
            println!("rho\tcorr\tp11\tp10\tp01");
            for r in &rows {
                let s = &r.summary;
                println!("{:.2}\t{:.3}\t{:.3}\t{:.3}\t{:.3}", r.rho, s.corr, s.p11, s.p10, s.p01);
            }
        }
        Command::Generate { rho, n, sensitivity, seed, out } => {
            let cfg = if sensitivity { GenConfig::sensitivity(n, rho) } else { GenConfig::base(n, rho) };
            let d = generate_dataset(&cfg, &mut RngStream::new(seed))?;
            write_dataset(&out, &d.data, Some(&d.truth))?;
        }
        Command::Fit { data, method, fit, out } => {
            let file = read_dataset(&data)?;
            let d = &file.dataset;
            let model = fit_method(method, &d.x, &d.y1, &d.y2, &fit.options(), &RngStream::new(fit.seed))
                .with_context(|| format!("fitting {method} on {}", data.display()))?;
            ModelFile::new(model, d).save(&out)?;
        }
        Command::Predict { model, data, out } => {
            let m = ModelFile::load(&model)?;
            let file = read_dataset(&data)?;
            m.check_schema(&file.dataset)?;
            let preds = m.model.predict_batch(&file.dataset.x)?;
            if preds.clamped > 0 {
                log::warn!("{} rows fell outside the model's valid region and were clamped", preds.clamped);
            }
            write_predictions(&out, &preds.risks)?;
        }
        Command::Evaluate { pred, data, truth, holdout, method, fit, out } => {
            let file = read_dataset(&data)?;
            let report = match (holdout, pred) {
                (Some(fraction), _) => {
                    let method = method.expect("clap enforces --method with --holdout");
                    holdout_evaluate(&file, method, fraction, fit.seed, &fit.options(), truth)?
                }
                (None, Some(p)) => evaluate_predictions(&read_predictions(&p)?, &file, truth)?,
                (None, None) => bail!("evaluate needs --pred or --holdout"),
            };
            fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")
                .with_context(|| format!("cannot write {}", out.display()))?;
        }
        Command::Figures { results, out } => {
            let rows = read_results(&results)?;
            for path in write_figures(&out, &figure_tables(&rows))? {
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
