//! Per-region variable selection and the post-search adjustment of change
//! points.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::fit::{fit_region, FitRequest, Mask, RegionFit};
use crate::mdl::{gaussian_residual_code, GridCode, MdlBreakdown};
use crate::partition::{induce_partition, ChangePointConfig, CutSet, PartitionGrid};
use crate::score::{Scored, Scorer};

/// Above this many design columns the per-region search switches from
/// exhaustive enumeration to bidirectional stepwise moves.
pub const EXHAUSTIVE_MAX_COLUMNS: usize = 15;

const TIE_TOL: f64 = 1e-12;

/// Fit statistic of every mask of one region (`None` when infeasible).
#[derive(Debug, Clone)]
pub(crate) enum MaskStats {
    Dense(Arc<Vec<Option<f64>>>),
    Lazy {
        rows: Vec<usize>,
        memo: HashMap<Mask, Option<f64>>,
    },
}

impl MaskStats {
    pub(crate) fn build(data: &Dataset, task: Task, rows: Vec<usize>) -> Self {
        let columns = data.p() + 1;
        if columns <= EXHAUSTIVE_MAX_COLUMNS {
            MaskStats::Dense(Arc::new(dense_stats(data, task, &rows)))
        } else {
            MaskStats::Lazy {
                rows,
                memo: HashMap::new(),
            }
        }
    }

    fn stat(&mut self, data: &Dataset, task: Task, mask: Mask) -> Option<f64> {
        match self {
            MaskStats::Dense(v) => v[mask.0 as usize],
            MaskStats::Lazy { rows, memo } => *memo.entry(mask).or_insert_with(|| {
                fit_region(data, &FitRequest { rows, mask, task })
                    .ok()
                    .map(|f| f.fit_stat)
            }),
        }
    }
}

pub(crate) fn dense_stats(data: &Dataset, task: Task, rows: &[usize]) -> Vec<Option<f64>> {
    let count = 1u64 << (data.p() + 1);
    (0..count)
        .map(|m| {
            fit_region(data, &FitRequest { rows, mask: Mask(m), task })
                .ok()
                .map(|f| f.fit_stat)
        })
        .collect()
}

/// Selected masks and the resulting code length.
#[derive(Debug, Clone)]
pub struct MaskSelection {
    pub masks: Vec<Mask>,
    pub breakdown: MdlBreakdown,
}

fn residual(task: Task, total_stat: f64, n: usize) -> f64 {
    match task {
        Task::Regression => gaussian_residual_code(total_stat, n),
        _ => total_stat,
    }
}

/// Coordinate-wise mask selection over regions. Every region starts from the
/// full mask (or its best feasible mask when the full one is singular); each
/// pass replaces one region's mask with the one minimizing the total while
/// the others stay fixed, until a whole pass changes nothing.
pub(crate) fn coordinate_select(
    data: &Dataset,
    task: Task,
    code: &GridCode,
    tables: &mut [MaskStats],
) -> MaskSelection {
    let p = data.p();
    let n = data.n();
    let full = Mask::full(p);
    let exhaustive = p < EXHAUSTIVE_MAX_COLUMNS;
    let mut masks = Vec::with_capacity(tables.len());
    let mut stats = Vec::with_capacity(tables.len());
    for t in tables.iter_mut() {
        let (m, s) = match t.stat(data, task, full) {
            Some(s) => (full, s),
            None => initial_fallback(data, task, t, p),
        };
        masks.push(m);
        stats.push(s);
    }
    loop {
        let mut changed = false;
        for r in 0..tables.len() {
            let others: f64 = stats.iter().enumerate().filter(|&(k, _)| k != r).map(|(_, s)| s).sum();
            let cost = code.param_cost[r];
            let value = |m: Mask, s: f64| m.size() as f64 * cost + residual(task, others + s, n);
            let current = value(masks[r], stats[r]);
            let candidates: Vec<(Mask, f64)> = if exhaustive {
                (0..1u64 << (p + 1))
                    .filter_map(|m| tables[r].stat(data, task, Mask(m)).map(|s| (Mask(m), s)))
                    .collect()
            } else {
                stepwise_candidates(data, task, &mut tables[r], masks[r], p, &value)
            };
            let best = candidates
                .iter()
                .map(|&(m, s)| value(m, s))
                .fold(f64::INFINITY, f64::min);
            if current <= best + TIE_TOL {
                continue;
            }
            let &(m, s) = candidates
                .iter()
                .filter(|&&(m, s)| value(m, s) <= best + TIE_TOL)
                .min_by_key(|(m, _)| m.tie_key(p))
                .expect("at least one candidate attains the minimum");
            masks[r] = m;
            stats[r] = s;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let total_stat: f64 = stats.iter().sum();
    MaskSelection {
        breakdown: code.breakdown(masks.iter().map(|m| m.size()), residual(task, total_stat, n)),
        masks,
    }
}

fn initial_fallback(data: &Dataset, task: Task, t: &mut MaskStats, p: usize) -> (Mask, f64) {
    // Largest feasible mask by dropping single columns from the full one;
    // the empty mask is always feasible.
    let full = Mask::full(p);
    let mut best: Option<(Mask, f64)> = None;
    for c in 0..=p {
        let m = full.without(c);
        if let Some(s) = t.stat(data, task, m) {
            if best.is_none_or(|(bm, bs)| s < bs || (s == bs && m.tie_key(p) < bm.tie_key(p))) {
                best = Some((m, s));
            }
        }
    }
    best.unwrap_or_else(|| (Mask::EMPTY, t.stat(data, task, Mask::EMPTY).expect("empty mask is feasible")))
}

/// Greedy add/drop moves from `start` until no single flip improves.
fn stepwise_candidates(
    data: &Dataset,
    task: Task,
    table: &mut MaskStats,
    start: Mask,
    p: usize,
    value: &dyn Fn(Mask, f64) -> f64,
) -> Vec<(Mask, f64)> {
    let mut cur = start;
    let mut cur_stat = table.stat(data, task, cur).expect("incumbent mask is feasible");
    loop {
        let mut best = (cur, cur_stat, value(cur, cur_stat));
        for c in 0..=p {
            let m = if cur.contains(c) { cur.without(c) } else { cur.with(c) };
            if let Some(s) = table.stat(data, task, m) {
                let v = value(m, s);
                if v < best.2 - TIE_TOL {
                    best = (m, s, v);
                }
            }
        }
        if best.0 == cur {
            return vec![(cur, cur_stat)];
        }
        cur = best.0;
        cur_stat = best.1;
    }
}

/// Result of variable selection on a fixed grid.
#[derive(Debug, Clone)]
pub struct Selection {
    pub fits: Vec<RegionFit>,
    pub breakdown: MdlBreakdown,
}

/// Chooses each region's variables by total code length, holding the grid
/// fixed, and returns the refitted regions.
pub fn select_features(
    data: &Dataset,
    task: Task,
    config: &ChangePointConfig,
    grid: &PartitionGrid,
) -> Result<Selection> {
    if grid.min_region_size() == 0 {
        return Err(Error::InvalidConfig("grid has an empty region".into()));
    }
    if config.region_count() != grid.region_count() {
        return Err(Error::InvalidConfig("grid does not match configuration".into()));
    }
    let code = GridCode::new(data.p(), grid);
    let mut tables: Vec<MaskStats> = grid
        .regions()
        .iter()
        .map(|r| MaskStats::build(data, task, r.members.clone()))
        .collect();
    let sel = coordinate_select(data, task, &code, &mut tables);
    let fits = refit(data, task, grid, &sel.masks)?;
    Ok(Selection {
        fits,
        breakdown: sel.breakdown,
    })
}

pub(crate) fn refit(data: &Dataset, task: Task, grid: &PartitionGrid, masks: &[Mask]) -> Result<Vec<RegionFit>> {
    grid.regions()
        .iter()
        .zip(masks)
        .map(|(r, &mask)| fit_region(data, &FitRequest { rows: &r.members, mask, task }))
        .collect()
}

/// Change points as `(predictor, position)` pairs.
fn points(set: &CutSet) -> Vec<(usize, usize)> {
    set.iter()
        .enumerate()
        .flat_map(|(j, ks)| ks.iter().map(move |&k| (j, k)))
        .collect()
}

fn from_points(p: usize, pts: impl IntoIterator<Item = (usize, usize)>) -> Option<CutSet> {
    let mut set = vec![Vec::new(); p];
    for (j, k) in pts {
        set[j].push(k);
    }
    for ks in &mut set {
        ks.sort_unstable();
        if ks.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
    }
    Some(set)
}

/// Subsets of the incumbent's change points plus one-at-a-time shifts of
/// each retained point, the incumbent first.
pub(crate) fn adjustment_candidates(scorer: &Scorer<'_>, best: &CutSet, shift_radius: usize) -> Vec<CutSet> {
    let p = best.len();
    let pts = points(best);
    let m = pts.len();
    let subsets: Vec<Vec<(usize, usize)>> = if m <= 12 {
        // Descending bit patterns put the full set (the incumbent) first.
        (0..1u32 << m)
            .rev()
            .map(|bits| (0..m).filter(|&i| bits >> i & 1 == 1).map(|i| pts[i]).collect())
            .collect()
    } else {
        std::iter::once(pts.clone())
            .chain((0..m).map(|d| pts.iter().enumerate().filter(|&(i, _)| i != d).map(|(_, &x)| x).collect()))
            .collect()
    };
    let mut out = Vec::new();
    for sub in subsets {
        if let Some(s) = from_points(p, sub.iter().copied()) {
            out.push(s);
        }
        for (idx, &(j, k)) in sub.iter().enumerate() {
            for d in 1..=shift_radius {
                for shifted in [k.checked_sub(d), Some(k + d)].into_iter().flatten() {
                    if shifted >= scorer.cuts().len(j) {
                        continue;
                    }
                    let moved = sub.iter().enumerate().map(|(i, &pt)| if i == idx { (j, shifted) } else { pt });
                    if let Some(s) = from_points(p, moved) {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// Evaluates every adjustment candidate and returns the minimizer; ties keep
/// the earliest candidate, so the incumbent wins unless strictly beaten.
pub fn final_adjust_cuts(scorer: &Scorer<'_>, best: &CutSet, shift_radius: usize) -> Option<Arc<Scored>> {
    let cands = adjustment_candidates(scorer, best, shift_radius);
    let scored: Vec<Option<Arc<Scored>>> = cands.par_iter().map(|c| scorer.score(c)).collect();
    let mut winner: Option<Arc<Scored>> = None;
    for s in scored.into_iter().flatten() {
        if winner.as_ref().is_none_or(|w| s.total() < w.total()) {
            winner = Some(s);
        }
    }
    winner
}

/// Repeats [`final_adjust_cuts`] from its own output until a pass brings no
/// strict improvement or `max_passes` passes have run.
pub fn adjust_until_stable(scorer: &Scorer<'_>, best: &CutSet, shift_radius: usize, max_passes: usize) -> Option<Arc<Scored>> {
    let mut current = final_adjust_cuts(scorer, best, shift_radius)?;
    for _ in 1..max_passes {
        let next = final_adjust_cuts(scorer, &current.set, shift_radius)?;
        if next.total() >= current.total() {
            break;
        }
        current = next;
    }
    Some(current)
}

/// Adjusted configuration with its refitted regions.
#[derive(Debug, Clone)]
pub struct Adjusted {
    pub config: ChangePointConfig,
    pub grid: PartitionGrid,
    pub fits: Vec<RegionFit>,
    pub breakdown: MdlBreakdown,
}

/// Value-level entry point: `config` must use admissible midpoint thresholds
/// of `scorer`'s data.
pub fn final_adjust(scorer: &Scorer<'_>, config: &ChangePointConfig, shift_radius: usize) -> Result<Adjusted> {
    let set = scorer
        .cuts()
        .to_cut_set(config)
        .ok_or_else(|| Error::InvalidConfig("thresholds are not admissible midpoints".into()))?;
    let best = final_adjust_cuts(scorer, &set, shift_radius)
        .ok_or_else(|| Error::InvalidConfig("no adjustment satisfies the region-size constraint".into()))?;
    scorer.materialize(&best)
}

pub(crate) fn materialize(data: &Dataset, task: Task, config: ChangePointConfig, masks: &[Mask], breakdown: MdlBreakdown) -> Result<Adjusted> {
    let grid = induce_partition(data, &config)?;
    let fits = refit(data, task, &grid, masks)?;
    Ok(Adjusted {
        config,
        grid,
        fits,
        breakdown,
    })
}
