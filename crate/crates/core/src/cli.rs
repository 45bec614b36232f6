//! Command-line surface: `fit`, `predict` and `simulate`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bpso::BpsoParams;
use crate::data::Task;
use crate::error::{Error, Result};
use crate::io::{predictions_to_delimited, read_dataset, read_predictors};
use crate::model::FittedModel;
use crate::pipeline::{fit, report, FitParams};
use crate::sim::{run_trials, summarize, trials_to_delimited, SettingName, SimSetting};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "partwise", version, about = "Partition-wise models selected by minimum description length")]
pub struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "PARTWISE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a model from delimited data.
    Fit(FitArgs),
    /// Apply a saved model to new data.
    Predict(PredictArgs),
    /// Run a simulation setting and print the summary table.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long = "max-cp-per-predictor", default_value_t = 3)]
    pub max_cp_per_predictor: usize,
    /// Default max(P + 2, 10).
    #[arg(long = "min-segment")]
    pub min_segment: Option<usize>,
    #[arg(long = "swarm-size", default_value_t = 50)]
    pub swarm_size: usize,
    #[arg(long = "max-iter", default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SearchArgs {
    pub fn params(&self) -> FitParams {
        FitParams {
            max_per_predictor: self.max_cp_per_predictor,
            min_segment: self.min_segment,
            bpso: BpsoParams {
                swarm_size: self.swarm_size,
                omega: self.omega,
                c1: self.c1,
                c2: self.c2,
                a: self.a,
                max_iter: self.max_iter,
                ..BpsoParams::default()
            },
            seed: self.seed,
            ..FitParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub response: String,
    #[arg(long, default_value = "regression")]
    pub task: Task,
    #[arg(long, default_value_t = ',')]
    pub delim: char,
    /// Model document path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the human-readable report here instead of stderr.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = ',')]
    pub delim: char,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub setting: SettingName,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// Noise standard deviation (regression settings).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Link of classification settings.
    #[arg(long, default_value = "logistic")]
    pub link: Task,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Summary table path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial table path.
    #[arg(long = "trials-out")]
    pub trials_out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

fn delim_byte(c: char) -> Result<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| Error::InvalidParameter(format!("delimiter `{c}` must be a single ASCII character")))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<i32> {
    let data = read_dataset(&args.data, &args.response, delim_byte(args.delim)?)?;
    let outcome = fit(&data, args.task, &args.search.params())?;
    let doc = outcome.model.to_json()?;
    emit(args.out.as_deref(), &doc)?;
    let text = report(&outcome);
    match &args.report {
        Some(p) => std::fs::write(p, text)?,
        None => eprint!("{text}"),
    }
    Ok(if outcome.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_predict(args: &PredictArgs) -> Result<i32> {
    let model = FittedModel::from_json(&std::fs::read_to_string(&args.model)?)?;
    let delim = delim_byte(args.delim)?;
    let data = read_predictors(&args.data, &model.predictors, delim)?;
    let preds = model.predict(&data)?;
    emit(args.out.as_deref(), &predictions_to_delimited(&preds, delim))?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let setting = SimSetting::named(args.setting, args.sigma, args.link)?;
    let results = run_trials(&setting, args.n, args.trials, args.search.seed, &args.search.params())?;
    let summary = summarize(&setting, args.n, &results);
    if let Some(p) = &args.trials_out {
        std::fs::write(p, trials_to_delimited(&results))?;
    }
    emit(args.out.as_deref(), &summary.to_delimited(&setting))?;
    Ok(EXIT_OK)
}

/// Runs a parsed command line on a pool of the requested size and returns
/// the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Simulate(a) => cmd_simulate(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
