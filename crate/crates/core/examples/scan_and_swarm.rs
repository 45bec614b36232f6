//! The search pipeline by hand: candidate scan, swarm search, final
//! adjustment and per-region feature selection.

use partwise::bpso::stream;
use partwise::refine::adjust_until_stable;
use partwise::{
    generate, induce_partition, run_bpso, scan_candidates, select_features, BpsoParams, ScanParams, Scorer, SimSetting, Task,
};

fn main() -> partwise::Result<()> {
    let data = generate(&SimSetting::cls1(Task::Probit), 400, &mut stream(5, 0, 0))?;
    let task = Task::Probit;

    let cands = scan_candidates(&data, task, &ScanParams::defaults(data.p()))?;
    println!("candidates: {:.3?}", cands.thresholds);

    let scorer = Scorer::new(&data, task, data.p() + 1);
    let params = BpsoParams { swarm_size: 30, ..BpsoParams::default() };
    let swarm = run_bpso(&scorer, &cands.positions, &params, 9)?;
    println!("swarm: {} iterations, converged {}, MDL {:.3}", swarm.iterations, swarm.converged, swarm.score());

    let best = adjust_until_stable(&scorer, &swarm.best.set, 2, 50).expect("admissible incumbent");
    let config = scorer.cuts().to_config(&best.set);
    let sel = select_features(&data, task, &config, &induce_partition(&data, &config)?)?;
    println!("adjusted: {:.3?} MDL {:.3}", config.breaks(), sel.breakdown.total);
    println!("{} distinct sets scored", scorer.evaluations());
    Ok(())
}
