use partwise::bpso::stream;
use partwise::{generate, induce_partition, select_features, ChangePointConfig, SimSetting, Task};

// Compare the code length of the true grid with a few wrong ones.
fn main() -> partwise::Result<()> {
    let s = SimSetting::reg1(1.0);
    let data = generate(&s, 400, &mut stream(4, 0, 0))?;
    let configs = [
        ("no breaks", ChangePointConfig::empty(4)),
        ("x1 only", ChangePointConfig::new(4, [(0, vec![4.0])])?),
        ("truth", s.true_config.clone()),
        ("truth + x2", ChangePointConfig::new(4, [(0, vec![4.0]), (1, vec![-3.0]), (2, vec![8.5])])?),
    ];
    println!("{:<12} {:>8} {:>10} {:>10} {:>10} {:>10}", "config", "total", "predictor", "segments", "params", "residual");
    for (name, cfg) in &configs {
        let b = select_features(&data, Task::Regression, cfg, &induce_partition(&data, cfg)?)?.breakdown;
        println!(
            "{name:<12} {:>8.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
            b.total, b.predictor_code, b.per_predictor_code, b.region_param_code, b.residual_code
        );
    }
    Ok(())
}
