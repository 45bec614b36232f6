//! End-to-end estimation: candidate scan, swarm search, final adjustment and
//! per-region variable selection.

use crate::bpso::{run_bpso, BpsoParams};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::mdl::MdlBreakdown;
use crate::model::FittedModel;
use crate::partition::induce_partition;
use crate::refine::{adjust_until_stable, select_features};
use crate::scan::{default_min_segment, scan_with, CandidateSet, ScanParams};
use crate::score::Scorer;

#[derive(Debug, Clone, PartialEq)]
pub struct FitParams {
    pub max_per_predictor: usize,
    /// Smallest 1-D segment during the scan; `None` for `max(P + 2, 10)`.
    pub min_segment: Option<usize>,
    /// Smallest grid region during the search; `None` for `P + 1`.
    pub min_region: Option<usize>,
    pub bpso: BpsoParams,
    /// Largest shift, in cut positions, tried by the final adjustment.
    pub shift_radius: usize,
    /// Passes of the final adjustment; each starts from the previous result.
    pub adjust_passes: usize,
    pub seed: u64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            max_per_predictor: 3,
            min_segment: None,
            min_region: None,
            bpso: BpsoParams::default(),
            shift_radius: 2,
            adjust_passes: 50,
            seed: 0,
        }
    }
}

/// A fitted model plus search diagnostics.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: FittedModel,
    pub breakdown: MdlBreakdown,
    pub candidates: CandidateSet,
    pub converged: bool,
    pub iterations: usize,
    /// Score of the swarm's best particle before the final adjustment.
    pub swarm_score: f64,
    pub evaluations: usize,
    pub warnings: Vec<String>,
}

pub fn fit(data: &Dataset, task: Task, params: &FitParams) -> Result<FitOutcome> {
    data.validate_for(task)?;
    params.bpso.validate()?;
    let p = data.p();
    let min_segment = params.min_segment.unwrap_or_else(|| default_min_segment(p));
    let min_region = params.min_region.unwrap_or(p + 1);
    if data.n() < min_region {
        return Err(Error::InvalidData(format!(
            "{} observations cannot support a region of {min_region}",
            data.n()
        )));
    }
    let scan = ScanParams {
        max_per_predictor: params.max_per_predictor,
        min_segment,
    };
    if scan.max_per_predictor == 0 || scan.min_segment < p + 2 {
        return Err(Error::InvalidParameter(format!(
            "need max_per_predictor >= 1 and min_segment >= P + 2 = {}",
            p + 2
        )));
    }
    let mut warnings = Vec::new();
    if data.n() < 2 * min_segment {
        warnings.push(format!(
            "only {} observations for a minimum segment of {min_segment}: no change point can be placed",
            data.n()
        ));
    }
    let scorer = Scorer::new(data, task, min_region);
    let candidates = scan_with(data, task, scorer.cuts(), &scan);
    let swarm = run_bpso(&scorer, &candidates.positions, &params.bpso, params.seed)?;
    let adjusted = adjust_until_stable(&scorer, &swarm.best.set, params.shift_radius, params.adjust_passes.max(1))
        .expect("the incumbent is admissible");
    let config = scorer.cuts().to_config(&adjusted.set);
    let grid = induce_partition(data, &config)?;
    let selection = select_features(data, task, &config, &grid)?;
    let model = FittedModel::new(data, task, config, &grid, selection.fits, &selection.breakdown);
    Ok(FitOutcome {
        model,
        breakdown: selection.breakdown,
        candidates,
        converged: swarm.converged,
        iterations: swarm.iterations,
        swarm_score: swarm.score(),
        evaluations: scorer.evaluations(),
        warnings,
    })
}

/// Human-readable summary of a fit.
pub fn report(outcome: &FitOutcome) -> String {
    use std::fmt::Write;
    let m = &outcome.model;
    let mut s = String::new();
    let _ = writeln!(s, "task: {}", m.task);
    let _ = writeln!(
        s,
        "search: {} after {} iterations, {} configurations scored",
        if outcome.converged { "converged" } else { "not converged" },
        outcome.iterations,
        outcome.evaluations
    );
    for w in &outcome.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s, "candidates:");
    for (j, ts) in outcome.candidates.thresholds.iter().enumerate() {
        if !ts.is_empty() {
            let _ = writeln!(s, "  {}: {}", m.predictors[j], fmt_list(ts));
        }
    }
    let _ = writeln!(s, "change points:");
    if m.config.break_count() == 0 {
        let _ = writeln!(s, "  none");
    }
    for j in m.config.break_predictors() {
        let _ = writeln!(s, "  {}: {}", m.predictors[j], fmt_list(m.config.thresholds(j)));
    }
    let _ = writeln!(s, "regions: {}", m.region_count());
    for (r, (fit, info)) in m.fits.iter().zip(&m.grid.regions).enumerate() {
        let bounds: Vec<String> = info
            .bounds
            .iter()
            .map(|b| {
                let name = &m.predictors[b.predictor];
                match (b.lower, b.upper) {
                    (None, Some(u)) => format!("{name} <= {u}"),
                    (Some(l), None) => format!("{name} > {l}"),
                    (Some(l), Some(u)) => format!("{l} < {name} <= {u}"),
                    (None, None) => name.clone(),
                }
            })
            .collect();
        let terms: Vec<String> = fit
            .mask()
            .columns()
            .zip(&fit.beta)
            .map(|(c, b)| {
                let label = if c == 0 { "(intercept)" } else { m.predictors[c - 1].as_str() };
                format!("{label}={b:.6}")
            })
            .collect();
        let _ = writeln!(
            s,
            "  [{r}] n={} {}: {}",
            info.n,
            if bounds.is_empty() { "all".to_string() } else { bounds.join(", ") },
            if terms.is_empty() { "(empty)".to_string() } else { terms.join(" ") }
        );
    }
    let b = &outcome.breakdown;
    let _ = writeln!(s, "mdl:");
    let _ = writeln!(s, "  predictor code       {:.6}", b.predictor_code);
    let _ = writeln!(s, "  per-predictor code   {:.6}", b.per_predictor_code);
    let _ = writeln!(s, "  region/param code    {:.6}", b.region_param_code);
    let _ = writeln!(s, "  residual code        {:.6}", b.residual_code);
    let _ = writeln!(s, "  total                {:.6}", b.total);
    if let Some(s2) = m.sigma2_hat {
        let _ = writeln!(s, "sigma2_hat: {s2:.6}");
    }
    s
}

fn fmt_list(ts: &[f64]) -> String {
    ts.iter().map(|t| format!("{t}")).collect::<Vec<_>>().join(", ")
}
