//! Simulation settings with known change points, trial evaluation and
//! aggregate tables.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bpso::stream;
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::fit::normal;
use crate::model::FittedModel;
use crate::partition::ChangePointConfig;
use crate::pipeline::{fit, FitParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingName {
    Reg1,
    Reg2,
    Cls1,
    Cls2,
}

impl std::str::FromStr for SettingName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reg1" => Ok(Self::Reg1),
            "reg2" => Ok(Self::Reg2),
            "cls1" => Ok(Self::Cls1),
            "cls2" => Ok(Self::Cls2),
            other => Err(Error::InvalidParameter(format!("unknown setting `{other}`"))),
        }
    }
}

impl std::fmt::Display for SettingName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Reg1 => "reg1",
            Self::Reg2 => "reg2",
            Self::Cls1 => "cls1",
            Self::Cls2 => "cls2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictorDist {
    Uniform(f64, f64),
    /// Integers `lo..=hi`, equally likely.
    DiscreteUniform(i64, i64),
}

impl PredictorDist {
    fn sample(self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Uniform(lo, hi) => rng.random_range(lo..hi),
            Self::DiscreteUniform(lo, hi) => rng.random_range(lo..=hi) as f64,
        }
    }
}

/// A data-generating process with a known partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSetting {
    pub name: SettingName,
    pub predictors: Vec<PredictorDist>,
    pub true_config: ChangePointConfig,
    /// Per region `(intercept, beta_1, .., beta_P)`; zeros mark unselected
    /// columns.
    pub true_betas: Vec<Vec<f64>>,
    pub noise_sigma: f64,
    /// `Regression` for Gaussian responses, otherwise the binary link.
    pub link: Task,
}

impl SimSetting {
    /// Four uniform predictors, breaks at `x1 = 4` and `x3 = 8.5`.
    pub fn reg1(sigma: f64) -> Self {
        use PredictorDist::Uniform;
        Self {
            name: SettingName::Reg1,
            predictors: vec![Uniform(0.0, 7.0), Uniform(-5.0, -1.0), Uniform(5.0, 12.0), Uniform(-10.0, -4.0)],
            true_config: ChangePointConfig::new(4, [(0, vec![4.0]), (2, vec![8.5])]).expect("valid"),
            true_betas: vec![
                vec![0.0, 2.0, -2.0, -4.0, 1.0],
                vec![0.0, 1.5, 1.0, 3.5, -2.0],
                vec![0.0, -1.5, -4.3, -1.7, -2.6],
                vec![0.0, -3.0, -1.0, 2.0, 1.0],
            ],
            noise_sigma: sigma,
            link: Task::Regression,
        }
    }

    /// Breaks at `x1 = 6` and `x4 = 1.5`, on predictors with no effect.
    pub fn reg2(sigma: f64) -> Self {
        use PredictorDist::Uniform;
        Self {
            name: SettingName::Reg2,
            predictors: vec![Uniform(4.0, 8.0), Uniform(-5.0, 0.0), Uniform(-9.0, -3.0), Uniform(0.0, 3.0)],
            true_config: ChangePointConfig::new(4, [(0, vec![6.0]), (3, vec![1.5])]).expect("valid"),
            true_betas: vec![
                vec![0.0, 0.0, 4.2, -4.6, 0.0],
                vec![0.0, 0.0, -4.2, -4.6, 0.0],
                vec![0.0, 0.0, 4.2, 4.6, 0.0],
                vec![0.0, 0.0, -4.2, 4.6, 0.0],
            ],
            noise_sigma: sigma,
            link: Task::Regression,
        }
    }

    /// Two breaks on `x1` (10 and 20).
    pub fn cls1(link: Task) -> Self {
        use PredictorDist::Uniform;
        Self {
            name: SettingName::Cls1,
            predictors: vec![Uniform(0.0, 30.0), Uniform(0.0, 10.0), Uniform(0.0, 10.0)],
            true_config: ChangePointConfig::new(3, [(0, vec![10.0, 20.0])]).expect("valid"),
            true_betas: vec![
                vec![0.0, 1.0, -1.5, 0.0],
                vec![0.0, 1.0, -4.5, 0.0],
                vec![15.0, -1.0, 2.0, 0.0],
            ],
            noise_sigma: 0.0,
            link,
        }
    }

    /// Breaks at the discrete `x1 = 3` and at `x3 = 0`.
    pub fn cls2(link: Task) -> Self {
        use PredictorDist::{DiscreteUniform, Uniform};
        Self {
            name: SettingName::Cls2,
            predictors: vec![DiscreteUniform(0, 6), Uniform(0.0, 20.0), Uniform(-10.0, 10.0)],
            true_config: ChangePointConfig::new(3, [(0, vec![3.0]), (2, vec![0.0])]).expect("valid"),
            true_betas: vec![
                vec![0.0, 0.0, 2.1, 5.1],
                vec![0.0, 0.0, 4.0, 2.4],
                vec![0.0, 0.0, 4.2, -5.0],
                vec![0.0, 0.0, -2.9, 3.2],
            ],
            noise_sigma: 0.0,
            link,
        }
    }

    /// Setting by name; `sigma` applies to regression, `link` to
    /// classification.
    pub fn named(name: SettingName, sigma: f64, link: Task) -> Result<Self> {
        if matches!(name, SettingName::Cls1 | SettingName::Cls2) && !link.is_classification() {
            return Err(Error::InvalidParameter(format!("{name} needs a logistic or probit link")));
        }
        Ok(match name {
            SettingName::Reg1 => Self::reg1(sigma),
            SettingName::Reg2 => Self::reg2(sigma),
            SettingName::Cls1 => Self::cls1(link),
            SettingName::Cls2 => Self::cls2(link),
        })
    }

    pub fn task(&self) -> Task {
        self.link
    }

    pub fn p(&self) -> usize {
        self.predictors.len()
    }

    /// Nonzero pattern of a region's true coefficients.
    pub fn true_mask(&self, region: usize) -> Vec<bool> {
        self.true_betas[region].iter().map(|&b| b != 0.0).collect()
    }

    /// True change points as `(predictor, threshold)`, by predictor then value.
    pub fn true_points(&self) -> Vec<(usize, f64)> {
        self.true_config
            .break_predictors()
            .into_iter()
            .flat_map(|j| self.true_config.thresholds(j).iter().map(move |&t| (j, t)))
            .collect()
    }

    /// `sigma=..` or `link=..` column of the summary table.
    pub fn noise_label(&self) -> String {
        match self.link {
            Task::Regression => format!("sigma={}", self.noise_sigma),
            link => format!("link={link}"),
        }
    }
}

/// Draws `n` observations.
pub fn generate(setting: &SimSetting, n: usize, rng: &mut impl Rng) -> Result<Dataset> {
    if n < 50 {
        return Err(Error::InvalidParameter("simulations need n >= 50".into()));
    }
    let p = setting.p();
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut columns = vec![Vec::with_capacity(n); p];
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = setting.predictors.iter().map(|d| d.sample(rng)).collect();
        let beta = &setting.true_betas[setting.true_config.assign_region(&x)];
        let eta = beta[0] + x.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
        let yi = match setting.link {
            Task::Regression => eta + setting.noise_sigma * noise.sample(rng),
            Task::Logistic => f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))),
            Task::Probit => f64::from(u8::from(rng.random::<f64>() < normal::cdf(eta))),
        };
        for (c, v) in columns.iter_mut().zip(x) {
            c.push(v);
        }
        y.push(yi);
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    Dataset::new(columns, y, names)
}

/// Accuracy of one fitted trial against the truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub correct_bl: bool,
    /// Per true change point: estimated minus true threshold, or 0 when both
    /// split the observed data identically. Empty unless `correct_bl`.
    pub cp_errors: Vec<f64>,
    /// Raw estimated-minus-true threshold differences. Empty unless
    /// `correct_bl`.
    pub cp_raw_errors: Vec<f64>,
    /// Per region, exact match of the selected columns with the true nonzero
    /// pattern. Empty unless `correct_bl`.
    pub region_masks_correct: Vec<bool>,
    pub runtime_ms: u128,
}

/// Whether thresholds `a` and `b` on predictor `j` put exactly the same
/// observations on each side.
pub fn same_split(data: &Dataset, j: usize, a: f64, b: f64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    !data.column(j).iter().any(|&v| v > lo && v <= hi)
}

pub fn evaluate_trial(truth: &SimSetting, fitted: &FittedModel, data: &Dataset, runtime_ms: u128) -> TrialResult {
    let est = &fitted.config;
    let tc = &truth.true_config;
    let correct_bl = est.p() == tc.p() && (0..tc.p()).all(|j| est.thresholds(j).len() == tc.thresholds(j).len());
    if !correct_bl {
        return TrialResult {
            correct_bl,
            cp_errors: Vec::new(),
            cp_raw_errors: Vec::new(),
            region_masks_correct: Vec::new(),
            runtime_ms,
        };
    }
    let mut cp_errors = Vec::new();
    let mut cp_raw_errors = Vec::new();
    for j in tc.break_predictors() {
        for (&t, &e) in tc.thresholds(j).iter().zip(est.thresholds(j)) {
            let raw = e - t;
            cp_raw_errors.push(raw);
            cp_errors.push(if same_split(data, j, e, t) { 0.0 } else { raw });
        }
    }
    let region_masks_correct = fitted
        .fits
        .iter()
        .enumerate()
        .map(|(r, f)| f.mask == truth.true_mask(r))
        .collect();
    TrialResult {
        correct_bl,
        cp_errors,
        cp_raw_errors,
        region_masks_correct,
        runtime_ms,
    }
}

const DATA_SLOT: u64 = 0xDA7A;
const FIT_SLOT: u64 = 0xF17;

/// Seed of trial `t`'s data draw and of its fit.
pub fn trial_seeds(seed: u64, trial: usize) -> (u64, u64) {
    let data: u64 = stream(seed, DATA_SLOT, trial as u64).random();
    let fit: u64 = stream(seed, FIT_SLOT, trial as u64).random();
    (data, fit)
}

/// Generates, fits and scores one trial.
pub fn run_trial(setting: &SimSetting, n: usize, seed: u64, trial: usize, params: &FitParams) -> Result<(TrialResult, FittedModel)> {
    let (data_seed, fit_seed) = trial_seeds(seed, trial);
    let mut rng = stream(data_seed, 0, 0);
    let data = generate(setting, n, &mut rng)?;
    let start = Instant::now();
    let outcome = fit(&data, setting.task(), &FitParams { seed: fit_seed, ..params.clone() })?;
    let ms = start.elapsed().as_millis();
    Ok((evaluate_trial(setting, &outcome.model, &data, ms), outcome.model))
}

/// Runs `trials` independent trials in parallel.
pub fn run_trials(setting: &SimSetting, n: usize, trials: usize, seed: u64, params: &FitParams) -> Result<Vec<TrialResult>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(setting, n, seed, t, params).map(|(r, _)| r))
        .collect()
}

/// Mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let k = xs.len() as f64;
        if xs.is_empty() {
            return Self { mean: f64::NAN, se: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / k;
        let se = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        };
        Self { mean, se }
    }
}

/// Aggregate over trials, shaped like the published result tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub setting: SettingName,
    pub n: usize,
    pub noise: String,
    pub trials: usize,
    pub correct_bl: usize,
    pub pct_correct_bl: f64,
    /// Per true change point, over trials with correct `B` and `L`.
    pub cp: Vec<MeanSe>,
    /// Per region fraction of correct masks, over trials with correct `B`
    /// and `L`.
    pub mask_accuracy: Vec<f64>,
}

pub fn summarize(setting: &SimSetting, n: usize, results: &[TrialResult]) -> Summary {
    let good: Vec<&TrialResult> = results.iter().filter(|r| r.correct_bl).collect();
    let cps = setting.true_points().len();
    let cp = (0..cps)
        .map(|i| MeanSe::of(&good.iter().map(|r| r.cp_errors[i]).collect::<Vec<_>>()))
        .collect();
    let regions = setting.true_config.region_count();
    let mask_accuracy = (0..regions)
        .map(|r| {
            if good.is_empty() {
                f64::NAN
            } else {
                good.iter().filter(|t| t.region_masks_correct[r]).count() as f64 / good.len() as f64
            }
        })
        .collect();
    Summary {
        setting: setting.name,
        n,
        noise: setting.noise_label(),
        trials: results.len(),
        correct_bl: good.len(),
        pct_correct_bl: 100.0 * good.len() as f64 / results.len().max(1) as f64,
        cp,
        mask_accuracy,
    }
}

impl Summary {
    /// Header and one row of comma-separated text.
    pub fn to_delimited(&self, setting: &SimSetting) -> String {
        let mut header = vec!["setting".to_string(), "n".into(), "noise".into(), "trials".into(), "pct_correct_BL".into()];
        let mut row = vec![
            self.setting.to_string(),
            self.n.to_string(),
            self.noise.clone(),
            self.trials.to_string(),
            format!("{:.1}", self.pct_correct_bl),
        ];
        let names: Vec<String> = {
            let mut seen = std::collections::HashMap::new();
            setting
                .true_points()
                .iter()
                .map(|&(j, _)| {
                    let c = seen.entry(j).or_insert(0);
                    *c += 1;
                    format!("cp{}_x{}", c, j + 1)
                })
                .collect()
        };
        for (name, ms) in names.iter().zip(&self.cp) {
            header.push(format!("{name}_mean"));
            header.push(format!("{name}_se"));
            row.push(format!("{:.4}", ms.mean));
            row.push(format!("{:.4}", ms.se));
        }
        for (r, a) in self.mask_accuracy.iter().enumerate() {
            header.push(format!("region{}_mask_acc", r + 1));
            row.push(format!("{:.1}", 100.0 * a));
        }
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

/// Per-trial table as comma-separated text.
pub fn trials_to_delimited(results: &[TrialResult]) -> String {
    let mut s = String::from("trial,correct_BL,cp_errors,masks_correct,runtime_ms\n");
    for (t, r) in results.iter().enumerate() {
        let errs: Vec<String> = r.cp_errors.iter().map(|e| format!("{e:.6}")).collect();
        let masks: Vec<&str> = r.region_masks_correct.iter().map(|&m| if m { "1" } else { "0" }).collect();
        s.push_str(&format!("{t},{},{},{},{}\n", u8::from(r.correct_bl), errs.join(";"), masks.join(";"), r.runtime_ms));
    }
    s
}
