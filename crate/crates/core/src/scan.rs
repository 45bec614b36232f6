//! Greedy univariate change-point scan producing the candidate superset that
//! seeds the swarm.
//!
//! Each predictor is scanned on its own, as if it were the only one with
//! change points. Thresholds are added one at a time, each minimizing the
//! full criterion given those already placed, with every region fitted on
//! the full variable mask.

use rayon::prelude::*;

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::fit::{fit_region, FitRequest, Mask};
use crate::mdl::{gaussian_residual_code, GridCode};
use crate::partition::{induce_unchecked, CutSet, CutTable};

/// Scan limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanParams {
    pub max_per_predictor: usize,
    pub min_segment: usize,
}

impl ScanParams {
    /// Three thresholds per predictor and segments of at least
    /// `max(P + 2, 10)` observations.
    pub fn defaults(p: usize) -> Self {
        Self {
            max_per_predictor: 3,
            min_segment: default_min_segment(p),
        }
    }
}

pub fn default_min_segment(p: usize) -> usize {
    (p + 2).max(10)
}

/// Candidate thresholds per predictor, with their cut positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub positions: CutSet,
    pub thresholds: Vec<Vec<f64>>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.positions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn scan_candidates(data: &Dataset, task: Task, params: &ScanParams) -> Result<CandidateSet> {
    if params.max_per_predictor == 0 {
        return Err(Error::InvalidParameter("max_per_predictor must be at least 1".into()));
    }
    if params.min_segment < data.p() + 2 {
        return Err(Error::InvalidParameter(format!(
            "min_segment must be at least P + 2 = {}",
            data.p() + 2
        )));
    }
    let cuts = CutTable::new(data);
    Ok(scan_with(data, task, &cuts, params))
}

pub(crate) fn scan_with(data: &Dataset, task: Task, cuts: &CutTable, params: &ScanParams) -> CandidateSet {
    let positions: CutSet = (0..data.p())
        .into_par_iter()
        .map(|j| scan_predictor(data, task, cuts, j, params))
        .collect();
    let thresholds = positions
        .iter()
        .enumerate()
        .map(|(j, ks)| ks.iter().map(|&k| cuts.threshold(j, k)).collect())
        .collect();
    CandidateSet {
        positions,
        thresholds,
    }
}

/// Scan score for breaks only on predictor `j` at positions `ks`, all
/// regions on the full mask. `None` if a region's full fit is singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScanScore {
    pub total: f64,
    /// Residual code (regression) or summed negative log-likelihood.
    pub fit: f64,
}

/// Smallest decrease of the fit term that counts as an improvement.
const FIT_TOL: f64 = 1e-9;

pub(crate) fn single_predictor_mdl(data: &Dataset, task: Task, cuts: &CutTable, j: usize, ks: &[usize]) -> Option<ScanScore> {
    let mut set = vec![Vec::new(); data.p()];
    set[j] = ks.to_vec();
    let grid = induce_unchecked(data, &cuts.to_config(&set));
    let code = GridCode::new(data.p(), &grid);
    let full = Mask::full(data.p());
    let mut stat = 0.0;
    for region in grid.regions() {
        let fit = fit_region(
            data,
            &FitRequest {
                rows: &region.members,
                mask: full,
                task,
            },
        )
        .ok()?;
        stat += fit.fit_stat;
    }
    let fit = match task {
        Task::Regression => gaussian_residual_code(stat, data.n()),
        _ => stat,
    };
    let total = code.breakdown(std::iter::repeat_n(full.size(), grid.region_count()), fit).total;
    Some(ScanScore { total, fit })
}

/// Greedy scan of one predictor. Each step adds the position with the
/// smallest criterion. The first addition only has to lower the fit term,
/// since structure on other predictors can hide this one's gain from a
/// one-predictor view; later additions must lower the criterion itself.
fn scan_predictor(data: &Dataset, task: Task, cuts: &CutTable, j: usize, params: &ScanParams) -> Vec<usize> {
    let n = data.n();
    let mut current: Vec<usize> = Vec::new();
    let Some(mut current_score) = single_predictor_mdl(data, task, cuts, j, &current) else {
        return current;
    };
    while current.len() < params.max_per_predictor {
        let mut best: Option<(usize, ScanScore)> = None;
        for k in 0..cuts.len(j) {
            if current.contains(&k) {
                continue;
            }
            let mut cand = current.clone();
            cand.push(k);
            cand.sort_unstable();
            if cuts.min_segment(j, &cand, n) < params.min_segment {
                continue;
            }
            if let Some(v) = single_predictor_mdl(data, task, cuts, j, &cand) {
                if best.is_none_or(|(_, bv)| v.total < bv.total) {
                    best = Some((k, v));
                }
            }
        }
        match best {
            Some((k, v))
                if v.fit < current_score.fit - FIT_TOL && (current.is_empty() || v.total < current_score.total) =>
            {
                current.push(k);
                current.sort_unstable();
                current_score = v;
            }
            _ => break,
        }
    }
    current
}
