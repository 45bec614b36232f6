//! Fitted partition-wise models and their persisted document form.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::fit::{binary_nll, normal, RegionFit};
use crate::mdl::{mdl, sigma2, MdlBreakdown};
use crate::partition::{induce_partition, ChangePointConfig, Interval, PartitionGrid};

/// Document format tag.
pub const MODEL_VERSION: &str = "partwise-v1";

/// Region layout without memberships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub region_count: usize,
    pub regions: Vec<RegionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub bounds: Vec<Interval>,
    /// Training observations in the region.
    pub n: usize,
}

impl GridSummary {
    pub fn from_grid(grid: &PartitionGrid) -> Self {
        Self {
            region_count: grid.region_count(),
            regions: grid
                .regions()
                .iter()
                .map(|r| RegionSummary {
                    bounds: r.bounds.clone(),
                    n: r.members.len(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub version: String,
    pub task: Task,
    /// Predictor column names, in design order.
    pub predictors: Vec<String>,
    pub config: ChangePointConfig,
    pub grid: GridSummary,
    pub fits: Vec<RegionFit>,
    pub mdl: f64,
    /// Pooled residual variance, regression only.
    pub sigma2_hat: Option<f64>,
}

/// Prediction for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub region: usize,
    /// Fitted mean for regression, linear predictor for classification.
    pub value: f64,
    /// Class-1 probability (classification only).
    pub probability: Option<f64>,
    pub label: Option<u8>,
}

impl FittedModel {
    pub fn new(
        data: &Dataset,
        task: Task,
        config: ChangePointConfig,
        grid: &PartitionGrid,
        fits: Vec<RegionFit>,
        breakdown: &MdlBreakdown,
    ) -> Self {
        let sigma2_hat = (task == Task::Regression)
            .then(|| sigma2(fits.iter().map(|f| f.fit_stat).sum(), data.n()));
        Self {
            version: MODEL_VERSION.to_string(),
            task,
            predictors: data.names().to_vec(),
            config,
            grid: GridSummary::from_grid(grid),
            fits,
            mdl: breakdown.total,
            sigma2_hat,
        }
    }

    pub fn region_count(&self) -> usize {
        self.fits.len()
    }

    pub fn predict_point(&self, x: &[f64]) -> Prediction {
        let region = self.config.assign_region(x);
        let value = self.fits[region].linear_predictor(x);
        let probability = match self.task {
            Task::Regression => None,
            Task::Logistic => Some(1.0 / (1.0 + (-value).exp())),
            Task::Probit => Some(normal::cdf(value)),
        };
        Prediction {
            region,
            value,
            probability,
            label: probability.map(|p| u8::from(p > 0.5)),
        }
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        self.check_schema(data)?;
        Ok((0..data.n()).map(|i| self.predict_point(&data.row(i))).collect())
    }

    /// Requires the data's predictor names to match the model's, in order.
    pub fn check_schema(&self, data: &Dataset) -> Result<()> {
        if data.names() != self.predictors.as_slice() {
            return Err(Error::Schema(format!(
                "model expects predictors {:?}, data has {:?}",
                self.predictors,
                data.names()
            )));
        }
        Ok(())
    }

    /// Recomputes every fit statistic from the stored coefficients on `data`
    /// and re-evaluates the criterion.
    pub fn recompute_mdl(&self, data: &Dataset) -> Result<MdlBreakdown> {
        self.check_schema(data)?;
        let grid = induce_partition(data, &self.config)?;
        if grid.region_count() != self.fits.len() {
            return Err(Error::Schema("fit count does not match the grid".into()));
        }
        let fits: Vec<RegionFit> = grid
            .regions()
            .iter()
            .zip(&self.fits)
            .map(|(region, f)| {
                let mask = f.mask();
                let stat = match self.task {
                    Task::Regression => region
                        .members
                        .iter()
                        .map(|&i| {
                            let r = data.response()[i] - f.linear_predictor(&data.row(i));
                            r * r
                        })
                        .sum(),
                    link => binary_nll(data, &region.members, mask, &f.beta, link),
                };
                RegionFit {
                    fit_stat: stat,
                    ..f.clone()
                }
            })
            .collect();
        mdl(data, self.task, &self.config, &grid, &fits)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: FittedModel = serde_json::from_str(s)?;
        if m.version != MODEL_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model version `{}`",
                m.version
            )));
        }
        if m.fits.len() != m.config.region_count() || m.grid.region_count != m.fits.len() {
            return Err(Error::Schema("region count mismatch".into()));
        }
        if m.config.p() != m.predictors.len()
            || m.fits.iter().any(|f| f.mask.len() != m.predictors.len() + 1 || f.mask().size() != f.beta.len())
        {
            return Err(Error::Schema("coefficient layout does not match predictors".into()));
        }
        Ok(m)
    }
}
