//! Recover a four-region grid from noisy piecewise-linear data.

use partwise::bpso::stream;
use partwise::pipeline::report;
use partwise::{fit, generate, FitParams, SimSetting, Task};

fn main() -> partwise::Result<()> {
    let setting = SimSetting::reg1(1.0);
    let data = generate(&setting, 400, &mut stream(7, 0, 0))?;
    let outcome = fit(&data, Task::Regression, &FitParams::default())?;
    print!("{}", report(&outcome));
    for j in 0..data.p() {
        println!("{}: {:?}", data.names()[j], outcome.model.config.thresholds(j));
    }
    Ok(())
}
