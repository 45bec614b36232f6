//! Per-region estimation: least squares for regression, damped Newton
//! maximum likelihood for logistic and probit links.

mod glm;
pub mod normal;
mod ols;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::Result;

pub use glm::{binary_gradient, binary_nll, fit_logistic, fit_probit};
pub use ols::fit_ols;

/// Selected design columns of a region. Bit 0 is the intercept, bit `j + 1`
/// is predictor `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mask(pub u64);

impl Mask {
    pub const EMPTY: Mask = Mask(0);

    /// Intercept plus all `p` predictors.
    pub fn full(p: usize) -> Self {
        Mask(if p + 1 >= 64 { u64::MAX } else { (1u64 << (p + 1)) - 1 })
    }

    pub fn contains(self, c: usize) -> bool {
        self.0 >> c & 1 == 1
    }

    pub fn with(self, c: usize) -> Self {
        Mask(self.0 | 1 << c)
    }

    pub fn without(self, c: usize) -> Self {
        Mask(self.0 & !(1 << c))
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Selected design columns, ascending.
    pub fn columns(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |c| bits >> c & 1 == 1)
    }

    pub fn to_bools(self, p: usize) -> Vec<bool> {
        (0..=p).map(|c| self.contains(c)).collect()
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Mask(
            bits.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .fold(0, |m, (c, _)| m | 1 << c),
        )
    }

    /// Ordering used to break ties between masks of equal score: fewer
    /// columns first, then the lexicographically smaller indicator vector
    /// (intercept first, `false < true`).
    pub fn tie_key(self, p: usize) -> (usize, Vec<bool>) {
        (self.size(), self.to_bools(p))
    }
}

/// Rows and design columns of one region fit.
#[derive(Debug, Clone, Copy)]
pub struct FitRequest<'a> {
    pub rows: &'a [usize],
    pub mask: Mask,
    pub task: Task,
}

/// Fitted submodel of one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFit {
    /// Length `P + 1`, index 0 is the intercept.
    pub mask: Vec<bool>,
    /// One coefficient per selected column, in column order.
    pub beta: Vec<f64>,
    /// Residual sum of squares or negative log-likelihood on the region.
    pub fit_stat: f64,
    /// Set when the ridge safeguard was needed to obtain finite estimates.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub stabilized: bool,
}

impl RegionFit {
    pub fn mask(&self) -> Mask {
        Mask::from_bools(&self.mask)
    }

    pub fn size(&self) -> usize {
        self.beta.len()
    }

    /// Linear predictor `x' beta` for a point given as predictor values.
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.mask()
            .columns()
            .zip(&self.beta)
            .map(|(c, b)| if c == 0 { *b } else { b * x[c - 1] })
            .sum()
    }
}

/// Dispatches on the request's task.
pub fn fit_region(data: &Dataset, req: &FitRequest<'_>) -> Result<RegionFit> {
    match req.task {
        Task::Regression => fit_ols(data, req),
        Task::Logistic => Ok(fit_logistic(data, req)),
        Task::Probit => Ok(fit_probit(data, req)),
    }
}

pub(crate) fn linear_predictor_at(data: &Dataset, i: usize, mask: Mask, beta: &[f64]) -> f64 {
    mask.columns()
        .zip(beta)
        .map(|(c, b)| b * data.design(i, c))
        .sum()
}
