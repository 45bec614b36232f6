//! Two-part code length of a partition-wise model.
//!
//! Code lengths of the model description are in bits (base-2 logarithms);
//! the Gaussian residual term keeps the natural logarithm. Both are summed
//! as printed by the criterion, without unit conversion.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::fit::RegionFit;
use crate::partition::{ChangePointConfig, PartitionGrid};

/// Floor on the pooled residual variance, reached only by exact fits.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// The four code-length terms and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdlBreakdown {
    /// `B log2 P`.
    pub predictor_code: f64,
    /// `sum_b [log2(B+1) + log2(l_b+1) + sum_z log2 n_{z,b}]`.
    pub per_predictor_code: f64,
    /// `sum_r [log2 R + (s_r/2) log2 n_r]`.
    pub region_param_code: f64,
    /// `(n/2) log(sigma2)` or the summed negative log-likelihood.
    pub residual_code: f64,
    pub total: f64,
}

impl MdlBreakdown {
    pub fn structural(&self) -> f64 {
        self.predictor_code + self.per_predictor_code + self.region_param_code
    }
}

/// Parts of the code that depend only on the grid: everything except the
/// per-region parameter counts and the residuals.
#[derive(Debug, Clone)]
pub struct GridCode {
    pub predictor_code: f64,
    pub per_predictor_code: f64,
    /// `R log2 R`.
    pub region_index_code: f64,
    /// `0.5 log2 n_r` per region: the cost of one parameter.
    pub param_cost: Vec<f64>,
}

impl GridCode {
    pub fn new(p: usize, grid: &PartitionGrid) -> Self {
        let b = grid.segment_counts().len() as f64;
        let predictor_code = b * (p as f64).log2();
        let per_predictor_code = grid
            .segment_counts()
            .iter()
            .map(|(_, counts)| {
                let l = (counts.len() - 1) as f64;
                (b + 1.0).log2()
                    + (l + 1.0).log2()
                    + counts.iter().map(|&c| log2_count(c)).sum::<f64>()
            })
            .fold(0.0, |acc, v| acc + v);
        let r = grid.region_count() as f64;
        Self {
            predictor_code,
            per_predictor_code,
            region_index_code: r * r.log2(),
            param_cost: grid
                .region_counts()
                .iter()
                .map(|&c| 0.5 * log2_count(c))
                .collect(),
        }
    }

    /// Region parameter code for the given per-region coefficient counts.
    pub fn region_param_code(&self, sizes: impl IntoIterator<Item = usize>) -> f64 {
        self.region_index_code
            + sizes
                .into_iter()
                .zip(&self.param_cost)
                .map(|(s, c)| s as f64 * c)
                .sum::<f64>()
    }

    pub fn breakdown(&self, sizes: impl IntoIterator<Item = usize>, residual_code: f64) -> MdlBreakdown {
        let region_param_code = self.region_param_code(sizes);
        MdlBreakdown {
            predictor_code: self.predictor_code,
            per_predictor_code: self.per_predictor_code,
            region_param_code,
            residual_code,
            total: self.predictor_code + self.per_predictor_code + region_param_code + residual_code,
        }
    }
}

fn log2_count(c: usize) -> f64 {
    if c <= 1 {
        0.0
    } else {
        (c as f64).log2()
    }
}

/// Pooled residual variance `RSS / n`, floored.
pub fn sigma2(rss: f64, n: usize) -> f64 {
    (rss / n as f64).max(SIGMA2_FLOOR)
}

/// `(n/2) log(sigma2)` with natural logarithm.
pub fn gaussian_residual_code(rss: f64, n: usize) -> f64 {
    0.5 * n as f64 * sigma2(rss, n).ln()
}

fn check_inputs(data: &Dataset, config: &ChangePointConfig, grid: &PartitionGrid, fits: &[RegionFit]) -> Result<()> {
    if config.region_count() != grid.region_count() || fits.len() != grid.region_count() {
        return Err(Error::InvalidConfig(format!(
            "grid has {} regions, configuration {} and fits {}",
            grid.region_count(),
            config.region_count(),
            fits.len()
        )));
    }
    if grid.min_region_size() == 0 {
        return Err(Error::InvalidConfig("empty region in grid".into()));
    }
    if fits.iter().any(|f| f.mask.len() != data.p() + 1) {
        return Err(Error::InvalidConfig("mask length must be P + 1".into()));
    }
    Ok(())
}

/// Criterion for partition-wise linear regression with OLS region fits.
pub fn mdl_regression(
    data: &Dataset,
    config: &ChangePointConfig,
    grid: &PartitionGrid,
    fits: &[RegionFit],
) -> Result<MdlBreakdown> {
    check_inputs(data, config, grid, fits)?;
    let code = GridCode::new(data.p(), grid);
    let rss: f64 = fits.iter().map(|f| f.fit_stat).sum();
    Ok(code.breakdown(
        fits.iter().map(RegionFit::size),
        gaussian_residual_code(rss, data.n()),
    ))
}

/// Criterion for partition-wise logistic or probit models; the residual code
/// is the total negative log-likelihood.
pub fn mdl_binary(
    data: &Dataset,
    config: &ChangePointConfig,
    grid: &PartitionGrid,
    fits: &[RegionFit],
    link: Task,
) -> Result<MdlBreakdown> {
    if !link.is_classification() {
        return Err(Error::InvalidParameter("mdl_binary needs a logistic or probit link".into()));
    }
    check_inputs(data, config, grid, fits)?;
    let code = GridCode::new(data.p(), grid);
    let nll: f64 = fits.iter().map(|f| f.fit_stat).sum();
    Ok(code.breakdown(fits.iter().map(RegionFit::size), nll))
}

/// Dispatches on the task.
pub fn mdl(
    data: &Dataset,
    task: Task,
    config: &ChangePointConfig,
    grid: &PartitionGrid,
    fits: &[RegionFit],
) -> Result<MdlBreakdown> {
    match task {
        Task::Regression => mdl_regression(data, config, grid, fits),
        link => mdl_binary(data, config, grid, fits, link),
    }
}
