//! Change-point configurations and the grid partitions they induce.
//!
//! A configuration lists, per predictor, ascending thresholds. An observation
//! falls into segment `z` of predictor `b` when `k[z-1] < x <= k[z]`, so a value
//! equal to a threshold belongs to the lower segment. Regions are the cells of
//! the product of all segments, numbered in mixed radix with the lowest-index
//! break predictor varying fastest.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Per-predictor threshold lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointConfig {
    breaks: Vec<Vec<f64>>,
}

impl ChangePointConfig {
    /// No change points on any of `p` predictors.
    pub fn empty(p: usize) -> Self {
        Self {
            breaks: vec![Vec::new(); p],
        }
    }

    /// Builds a configuration from `(predictor, thresholds)` pairs. Thresholds
    /// are sorted; duplicates are rejected.
    pub fn new(p: usize, entries: impl IntoIterator<Item = (usize, Vec<f64>)>) -> Result<Self> {
        let mut breaks = vec![Vec::new(); p];
        for (j, mut ts) in entries {
            if j >= p {
                return Err(Error::InvalidConfig(format!(
                    "predictor index {j} out of range for {p} predictors"
                )));
            }
            if ts.iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidConfig("non-finite threshold".into()));
            }
            ts.sort_by(f64::total_cmp);
            breaks[j].extend(ts);
            breaks[j].sort_by(f64::total_cmp);
        }
        let cfg = Self { breaks };
        cfg.check_increasing()?;
        Ok(cfg)
    }

    fn check_increasing(&self) -> Result<()> {
        for (j, ts) in self.breaks.iter().enumerate() {
            if ts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "thresholds on predictor {j} are not strictly increasing"
                )));
            }
        }
        Ok(())
    }

    /// Checks the configuration against a dataset: matching predictor count
    /// and every threshold strictly inside the observed range.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.breaks.len() != data.p() {
            return Err(Error::InvalidConfig(format!(
                "configuration covers {} predictors, data has {}",
                self.breaks.len(),
                data.p()
            )));
        }
        self.check_increasing()?;
        for (j, ts) in self.breaks.iter().enumerate() {
            let (lo, hi) = data.range(j);
            if let Some(t) = ts.iter().find(|&&t| !(t > lo && t < hi)) {
                return Err(Error::InvalidConfig(format!(
                    "threshold {t} on `{}` lies outside the open range ({lo}, {hi})",
                    data.names()[j]
                )));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.breaks.len()
    }

    pub fn thresholds(&self, j: usize) -> &[f64] {
        &self.breaks[j]
    }

    pub fn breaks(&self) -> &[Vec<f64>] {
        &self.breaks
    }

    /// Predictors carrying at least one threshold, ascending.
    pub fn break_predictors(&self) -> Vec<usize> {
        (0..self.breaks.len())
            .filter(|&j| !self.breaks[j].is_empty())
            .collect()
    }

    /// Number of predictors with change points.
    pub fn break_count(&self) -> usize {
        self.breaks.iter().filter(|t| !t.is_empty()).count()
    }

    /// Total number of thresholds over all predictors.
    pub fn threshold_count(&self) -> usize {
        self.breaks.iter().map(Vec::len).sum()
    }

    /// `prod_b (l_b + 1)`.
    pub fn region_count(&self) -> usize {
        self.breaks.iter().map(|t| t.len() + 1).product()
    }

    /// Segment of predictor `j` containing value `x`.
    #[inline]
    pub fn segment(&self, j: usize, x: f64) -> usize {
        self.breaks[j].partition_point(|&t| t < x)
    }

    /// Region index of a point. Values beyond the training range fall in the
    /// outermost segments.
    pub fn assign_region(&self, x: &[f64]) -> usize {
        let mut region = 0;
        let mut stride = 1;
        for (j, ts) in self.breaks.iter().enumerate() {
            if ts.is_empty() {
                continue;
            }
            region += self.segment(j, x[j]) * stride;
            stride *= ts.len() + 1;
        }
        region
    }

    /// Per-break-predictor segment indices of a region, inverse of the
    /// mixed-radix numbering.
    pub fn region_segments(&self, mut region: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, ts) in self.breaks.iter().enumerate() {
            if ts.is_empty() {
                continue;
            }
            let base = ts.len() + 1;
            out.push((j, region % base));
            region /= base;
        }
        out
    }

    /// Hyper-rectangle of a region; `None` bounds are infinite.
    pub fn region_bounds(&self, region: usize) -> Vec<Interval> {
        self.region_segments(region)
            .into_iter()
            .map(|(j, z)| {
                let ts = &self.breaks[j];
                Interval {
                    predictor: j,
                    lower: if z == 0 { None } else { Some(ts[z - 1]) },
                    upper: ts.get(z).copied(),
                }
            })
            .collect()
    }
}

/// Interval `(lower, upper]` of one break predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub predictor: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// One grid cell and the observations inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub bounds: Vec<Interval>,
    pub members: Vec<usize>,
}

/// Regions induced by a configuration on a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGrid {
    regions: Vec<Region>,
    /// `(predictor, n_{z,b} for z = 0..=l_b)` for every break predictor.
    segment_counts: Vec<(usize, Vec<usize>)>,
}

impl PartitionGrid {
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn region_counts(&self) -> Vec<usize> {
        self.regions.iter().map(|r| r.members.len()).collect()
    }

    pub fn segment_counts(&self) -> &[(usize, Vec<usize>)] {
        &self.segment_counts
    }

    /// Smallest region size (0 for an empty cell).
    pub fn min_region_size(&self) -> usize {
        self.regions
            .iter()
            .map(|r| r.members.len())
            .min()
            .unwrap_or(0)
    }
}

/// Splits the observations into the grid induced by `config`.
pub fn induce_partition(data: &Dataset, config: &ChangePointConfig) -> Result<PartitionGrid> {
    config.validate(data)?;
    Ok(induce_unchecked(data, config))
}

pub(crate) fn induce_unchecked(data: &Dataset, config: &ChangePointConfig) -> PartitionGrid {
    let r_count = config.region_count();
    let mut members = vec![Vec::new(); r_count];
    let breaks = config.break_predictors();
    let mut segment_counts: Vec<(usize, Vec<usize>)> = breaks
        .iter()
        .map(|&j| (j, vec![0; config.thresholds(j).len() + 1]))
        .collect();
    for i in 0..data.n() {
        let mut region = 0;
        let mut stride = 1;
        for (slot, &j) in breaks.iter().enumerate() {
            let z = config.segment(j, data.value(i, j));
            segment_counts[slot].1[z] += 1;
            region += z * stride;
            stride *= config.thresholds(j).len() + 1;
        }
        members[region].push(i);
    }
    let regions = members
        .into_iter()
        .enumerate()
        .map(|(r, m)| Region {
            bounds: config.region_bounds(r),
            members: m,
        })
        .collect();
    PartitionGrid {
        regions,
        segment_counts,
    }
}

/// Admissible thresholds of every predictor: midpoints between consecutive
/// distinct sorted values. Position `k` of predictor `j` is the `k`-th such
/// midpoint; `below[j][k]` observations lie at or under it.
#[derive(Debug, Clone)]
pub struct CutTable {
    cuts: Vec<Vec<f64>>,
    below: Vec<Vec<usize>>,
    /// Observed values on either side of each cut.
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

/// A configuration expressed as sorted cut positions per predictor.
pub type CutSet = Vec<Vec<usize>>;

impl CutTable {
    pub fn new(data: &Dataset) -> Self {
        let mut cuts = Vec::with_capacity(data.p());
        let mut below = Vec::with_capacity(data.p());
        let mut lower = Vec::with_capacity(data.p());
        let mut upper = Vec::with_capacity(data.p());
        for j in 0..data.p() {
            let col = data.column(j);
            let ord = data.order(j);
            let mut c = Vec::new();
            let mut b = Vec::new();
            let mut l = Vec::new();
            let mut u = Vec::new();
            for k in 0..ord.len().saturating_sub(1) {
                let (lo, hi) = (col[ord[k]], col[ord[k + 1]]);
                if lo < hi {
                    c.push(lo + (hi - lo) / 2.0);
                    b.push(k + 1);
                    l.push(lo);
                    u.push(hi);
                }
            }
            cuts.push(c);
            below.push(b);
            lower.push(l);
            upper.push(u);
        }
        Self { cuts, below, lower, upper }
    }

    pub fn p(&self) -> usize {
        self.cuts.len()
    }

    /// Number of admissible positions on predictor `j`.
    pub fn len(&self, j: usize) -> usize {
        self.cuts[j].len()
    }

    pub fn is_empty(&self, j: usize) -> bool {
        self.cuts[j].is_empty()
    }

    pub fn threshold(&self, j: usize, k: usize) -> f64 {
        self.cuts[j][k]
    }

    pub fn below(&self, j: usize, k: usize) -> usize {
        self.below[j][k]
    }

    /// Position of an exact admissible threshold.
    pub fn position(&self, j: usize, threshold: f64) -> Option<usize> {
        self.cuts[j]
            .binary_search_by(|c| c.total_cmp(&threshold))
            .ok()
    }

    /// Position whose split of the data equals the split at `threshold`,
    /// if data lie on both sides of it.
    pub fn snap(&self, j: usize, threshold: f64) -> Option<usize> {
        let k = self.lower[j].partition_point(|&lo| lo <= threshold).checked_sub(1)?;
        (self.upper[j][k] > threshold).then_some(k)
    }

    /// Positions splitting the data as `config` does; `None` if some
    /// threshold leaves all data on one side.
    pub fn snap_config(&self, config: &ChangePointConfig) -> Option<CutSet> {
        let mut set: CutSet = config
            .breaks()
            .iter()
            .enumerate()
            .map(|(j, ts)| ts.iter().map(|&t| self.snap(j, t)).collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()?;
        for ks in &mut set {
            ks.sort_unstable();
            ks.dedup();
        }
        Some(set)
    }

    pub fn to_config(&self, set: &CutSet) -> ChangePointConfig {
        ChangePointConfig {
            breaks: set
                .iter()
                .enumerate()
                .map(|(j, ks)| ks.iter().map(|&k| self.cuts[j][k]).collect())
                .collect(),
        }
    }

    /// Positions of a configuration's thresholds; `None` if any threshold is
    /// not an admissible midpoint.
    pub fn to_cut_set(&self, config: &ChangePointConfig) -> Option<CutSet> {
        config
            .breaks()
            .iter()
            .enumerate()
            .map(|(j, ts)| ts.iter().map(|&t| self.position(j, t)).collect())
            .collect()
    }

    /// Smallest 1-D segment size on predictor `j` for sorted positions `ks`.
    pub fn min_segment(&self, j: usize, ks: &[usize], n: usize) -> usize {
        let mut prev = 0;
        let mut min = usize::MAX;
        for &k in ks {
            let b = self.below[j][k];
            min = min.min(b - prev);
            prev = b;
        }
        min.min(n - prev)
    }
}
