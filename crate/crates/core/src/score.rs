//! Memoized evaluation of change-point sets: partition, per-region variable
//! selection and code length. Shared by the scan, the swarm and the final
//! adjustment; safe to call from many threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::data::{Dataset, Task};
use crate::error::Result;
use crate::fit::Mask;
use crate::mdl::{GridCode, MdlBreakdown};
use crate::partition::{induce_unchecked, CutSet, CutTable};
use crate::refine::{coordinate_select, dense_stats, materialize, Adjusted, MaskStats, EXHAUSTIVE_MAX_COLUMNS};

/// Region identity: `(predictor, lower position, upper position)` for every
/// break predictor, `None` meaning unbounded.
type RegionKey = Vec<(usize, Option<usize>, Option<usize>)>;

/// A scored change-point set.
#[derive(Debug, Clone)]
pub struct Scored {
    pub set: CutSet,
    pub masks: Vec<Mask>,
    pub breakdown: MdlBreakdown,
}

impl Scored {
    pub fn total(&self) -> f64 {
        self.breakdown.total
    }
}

pub struct Scorer<'a> {
    data: &'a Dataset,
    task: Task,
    cuts: CutTable,
    min_region: usize,
    configs: Mutex<HashMap<CutSet, Option<Arc<Scored>>>>,
    regions: Mutex<HashMap<RegionKey, Arc<Vec<Option<f64>>>>>,
}

impl<'a> Scorer<'a> {
    /// `min_region` is the smallest admissible region size.
    pub fn new(data: &'a Dataset, task: Task, min_region: usize) -> Self {
        Self {
            data,
            task,
            cuts: CutTable::new(data),
            min_region: min_region.max(1),
            configs: Mutex::new(HashMap::new()),
            regions: Mutex::new(HashMap::new()),
        }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn cuts(&self) -> &CutTable {
        &self.cuts
    }

    pub fn min_region(&self) -> usize {
        self.min_region
    }

    /// Whether every region induced by `set` holds at least `min_region`
    /// observations.
    pub fn admissible(&self, set: &CutSet) -> bool {
        let cfg = self.cuts.to_config(set);
        if cfg.region_count() > self.data.n() / self.min_region {
            return false;
        }
        induce_unchecked(self.data, &cfg).min_region_size() >= self.min_region
    }

    /// Number of distinct sets evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.configs.lock().unwrap().len()
    }

    /// Feature-selected code length of `set`, or `None` if some region is
    /// smaller than the minimum.
    pub fn score(&self, set: &CutSet) -> Option<Arc<Scored>> {
        if let Some(hit) = self.configs.lock().unwrap().get(set) {
            return hit.clone();
        }
        let result = self.compute(set).map(Arc::new);
        self.configs
            .lock()
            .unwrap()
            .insert(set.clone(), result.clone());
        result
    }

    fn compute(&self, set: &CutSet) -> Option<Scored> {
        let cfg = self.cuts.to_config(set);
        if cfg.region_count() > self.data.n() / self.min_region {
            return None;
        }
        let grid = induce_unchecked(self.data, &cfg);
        if grid.min_region_size() < self.min_region {
            return None;
        }
        let code = GridCode::new(self.data.p(), &grid);
        let dense = self.data.p() < EXHAUSTIVE_MAX_COLUMNS;
        let mut tables: Vec<MaskStats> = grid
            .regions()
            .iter()
            .enumerate()
            .map(|(r, region)| {
                if !dense {
                    return MaskStats::build(self.data, self.task, region.members.clone());
                }
                let key: RegionKey = cfg
                    .region_segments(r)
                    .into_iter()
                    .map(|(j, z)| {
                        let ks = &set[j];
                        (j, z.checked_sub(1).map(|q| ks[q]), ks.get(z).copied())
                    })
                    .collect();
                if let Some(stats) = self.regions.lock().unwrap().get(&key) {
                    return MaskStats::Dense(stats.clone());
                }
                let stats = Arc::new(dense_stats(self.data, self.task, &region.members));
                self.regions.lock().unwrap().insert(key, stats.clone());
                MaskStats::Dense(stats)
            })
            .collect();
        let sel = coordinate_select(self.data, self.task, &code, &mut tables);
        Some(Scored {
            set: set.clone(),
            masks: sel.masks,
            breakdown: sel.breakdown,
        })
    }

    /// Refits the selected masks of a scored set.
    pub fn materialize(&self, scored: &Scored) -> Result<Adjusted> {
        materialize(
            self.data,
            self.task,
            self.cuts.to_config(&scored.set),
            &scored.masks,
            scored.breakdown,
        )
    }
}
