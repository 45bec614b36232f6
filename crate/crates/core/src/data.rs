//! Observations, predictors and the response.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest predictor count representable by a [`crate::Mask`] (intercept plus
/// predictors must fit in 64 bits).
pub const MAX_PREDICTORS: usize = 63;

/// The kind of submodel fitted in every region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Logistic,
    Probit,
}

impl Task {
    pub fn is_classification(self) -> bool {
        !matches!(self, Task::Regression)
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Logistic => "logistic",
            Task::Probit => "probit",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" => Ok(Task::Regression),
            "logistic" => Ok(Task::Logistic),
            "probit" => Ok(Task::Probit),
            other => Err(Error::InvalidParameter(format!("unknown task `{other}`"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `n` observations of `P` predictors plus a response.
///
/// Predictors are stored column-major. For every predictor the permutation
/// sorting its values ascending is precomputed, since change points are
/// searched along order statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
    order: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from predictor columns and a response.
    pub fn new(columns: Vec<Vec<f64>>, response: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::InvalidData("no observations".into()));
        }
        if columns.len() != names.len() {
            return Err(Error::InvalidData(format!(
                "{} columns but {} names",
                columns.len(),
                names.len()
            )));
        }
        if columns.len() > MAX_PREDICTORS {
            return Err(Error::InvalidData(format!(
                "at most {MAX_PREDICTORS} predictors are supported, got {}",
                columns.len()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidData(format!(
                    "predictor `{}` has {} values, response has {n}",
                    names[j],
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value in predictor `{}` at observation {i}",
                    names[j]
                )));
            }
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite response at observation {i}"
            )));
        }
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Ok(Self {
            columns,
            response,
            order,
            names,
        })
    }

    /// Builds a dataset from row-major predictor values, naming columns `x1..xP`.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidData("ragged predictor rows".into()));
        }
        let columns = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        Self::new(columns, response, names)
    }

    /// Checks that the response is binary, as required by logistic and probit fits.
    pub fn validate_for(&self, task: Task) -> Result<()> {
        if task.is_classification() {
            if let Some(i) = self.response.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidData(format!(
                    "{task} requires a 0/1 response; observation {i} is {}",
                    self.response[i]
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Indices of observations sorted ascending by predictor `j`.
    pub fn order(&self, j: usize) -> &[usize] {
        &self.order[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Predictor values of observation `i`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Range `(min, max)` of predictor `j`.
    pub fn range(&self, j: usize) -> (f64, f64) {
        let ord = &self.order[j];
        (self.columns[j][ord[0]], self.columns[j][ord[ord.len() - 1]])
    }

    /// Entry `c` of the design vector `(1, x_1, .., x_P)` for observation `i`.
    #[inline]
    pub fn design(&self, i: usize, c: usize) -> f64 {
        if c == 0 {
            1.0
        } else {
            self.columns[c - 1][i]
        }
    }
}
