mod common;

use partwise::fit::fit_region;
use partwise::mdl::mdl;
use partwise::{
    final_adjust, induce_partition, select_features, ChangePointConfig, Dataset, FitRequest, Mask, RegionFit, Scorer,
    Task,
};
use rand::Rng;

/// Total criterion of explicit per-region masks; `None` if a fit is singular.
fn total_for(data: &Dataset, task: Task, cfg: &ChangePointConfig, masks: &[Mask]) -> Option<f64> {
    let grid = induce_partition(data, cfg).unwrap();
    let fits: Option<Vec<RegionFit>> = grid
        .regions()
        .iter()
        .zip(masks)
        .map(|(r, &mask)| fit_region(data, &FitRequest { rows: &r.members, mask, task }).ok())
        .collect();
    Some(mdl(data, task, cfg, &grid, &fits?).unwrap().total)
}

#[test]
fn single_region_matches_exhaustive() {
    let mut r = common::rng(3);
    let n = 200;
    let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
    let y = (0..n).map(|i| 4.0 * cols[1][i] + r.random_range(-0.3..0.3)).collect();
    let data = Dataset::new(cols, y, common::names(3)).unwrap();
    let cfg = ChangePointConfig::empty(3);
    let sel = select_features(&data, Task::Regression, &cfg, &induce_partition(&data, &cfg).unwrap()).unwrap();
    let best = (0..16u64)
        .filter_map(|m| total_for(&data, Task::Regression, &cfg, &[Mask(m)]).map(|t| (m, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(sel.fits[0].mask(), Mask(best.0));
    assert!(sel.fits[0].mask() == Mask(0b100) || sel.fits[0].mask() == Mask(0b101));
    assert!((sel.breakdown.total - best.1).abs() < 1e-9);
}

fn two_region_instance(seed: u64, task: Task) -> (Dataset, ChangePointConfig) {
    let mut r = common::rng(seed);
    let data = if task == Task::Regression {
        let n = 120;
        let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let y = (0..n)
            .map(|i| {
                let s = if cols[0][i] > 0.0 { 2.0 } else { -1.0 };
                s * cols[1][i] + r.random_range(-1.0..1.0)
            })
            .collect();
        Dataset::new(cols, y, common::names(2)).unwrap()
    } else {
        common::binary_region(&mut r, 120, &[0.2, 1.5, -1.0], task)
    };
    (data, ChangePointConfig::new(2, [(0, vec![0.0])]).unwrap())
}

#[test]
fn coordinate_selection_equals_joint_exhaustive() {
    for seed in 0..6 {
        for task in [Task::Regression, Task::Logistic, Task::Probit] {
            let (data, cfg) = two_region_instance(seed, task);
            let grid = induce_partition(&data, &cfg).unwrap();
            let sel = select_features(&data, task, &cfg, &grid).unwrap();
            let mut best = f64::INFINITY;
            for a in 0..8u64 {
                for b in 0..8u64 {
                    if let Some(t) = total_for(&data, task, &cfg, &[Mask(a), Mask(b)]) {
                        best = best.min(t);
                    }
                }
            }
            assert!((sel.breakdown.total - best).abs() < 1e-9, "{task} seed {seed}: {} vs {best}", sel.breakdown.total);
        }
    }
}

#[test]
fn classification_regions_decouple() {
    for seed in 0..6 {
        let (data, cfg) = two_region_instance(seed, Task::Logistic);
        let grid = induce_partition(&data, &cfg).unwrap();
        let sel = select_features(&data, Task::Logistic, &cfg, &grid).unwrap();
        for (r, region) in grid.regions().iter().enumerate() {
            // Per region, only (s_r / 2) log2 n_r and the likelihood depend on the mask.
            let cost = |m: u64| {
                fit_region(&data, &FitRequest { rows: &region.members, mask: Mask(m), task: Task::Logistic })
                    .map(|f| f.fit_stat + Mask(m).size() as f64 / 2.0 * (region.members.len() as f64).log2())
                    .unwrap()
            };
            let best = (0..8u64).map(cost).fold(f64::INFINITY, f64::min);
            assert!((cost(sel.fits[r].mask().0) - best).abs() < 1e-9);
        }
    }
}

#[test]
fn selection_never_worsens_the_full_mask() {
    let mut r = common::rng(8);
    for _ in 0..40 {
        let data = common::random_dataset(&mut r, 80, 3);
        let cfg = common::random_config(&mut r, &data, 1);
        let grid = induce_partition(&data, &cfg).unwrap();
        if grid.min_region_size() < 5 {
            continue;
        }
        let full = vec![Mask::full(3); grid.region_count()];
        let start = total_for(&data, Task::Regression, &cfg, &full).unwrap();
        let sel = select_features(&data, Task::Regression, &cfg, &grid).unwrap();
        assert!(sel.breakdown.total <= start + 1e-9);
    }
}

#[test]
fn adjusting_nothing_returns_the_input() {
    let (data, _) = two_region_instance(1, Task::Regression);
    let scorer = Scorer::new(&data, Task::Regression, 3);
    let empty = ChangePointConfig::empty(2);
    let out = final_adjust(&scorer, &empty, 2).unwrap();
    assert_eq!(out.config, empty);
    assert_eq!(scorer.evaluations(), 1);
}

#[test]
fn two_points_give_four_subsets() {
    let mut r = common::rng(2);
    let data = common::random_dataset(&mut r, 100, 2);
    let scorer = Scorer::new(&data, Task::Regression, 3);
    let cuts = scorer.cuts();
    let cfg = cuts.to_config(&vec![vec![cuts.len(0) / 2], vec![cuts.len(1) / 2]]);
    final_adjust(&scorer, &cfg, 0).unwrap();
    assert_eq!(scorer.evaluations(), 4);
}

#[test]
fn adjustment_never_worsens() {
    let mut r = common::rng(12);
    for _ in 0..30 {
        let data = common::random_dataset(&mut r, 90, 2);
        let scorer = Scorer::new(&data, Task::Regression, 3);
        let cuts = scorer.cuts();
        let set: Vec<Vec<usize>> = (0..2)
            .map(|j| if r.random_bool(0.7) { vec![r.random_range(10..cuts.len(j) - 10)] } else { vec![] })
            .collect();
        let Some(before) = scorer.score(&set).map(|s| s.total()) else {
            continue;
        };
        let out = final_adjust(&scorer, &cuts.to_config(&set), 2).unwrap();
        assert!(out.breakdown.total <= before);
        let recomputed = mdl(&data, Task::Regression, &out.config, &out.grid, &out.fits).unwrap();
        assert!((recomputed.total - out.breakdown.total).abs() < 1e-9);
    }
}

#[test]
fn non_midpoint_threshold_is_rejected() {
    let (data, _) = two_region_instance(1, Task::Regression);
    let scorer = Scorer::new(&data, Task::Regression, 3);
    let cfg = ChangePointConfig::new(2, [(0, vec![0.123_456_789])]).unwrap();
    assert!(final_adjust(&scorer, &cfg, 2).is_err());
}
