//! A short simulation study; the `simulate` subcommand runs the same harness.

use partwise::sim::{run_trials, summarize};
use partwise::{FitParams, SimSetting};

fn main() -> partwise::Result<()> {
    let setting = SimSetting::reg1(1.0);
    let results = run_trials(&setting, 400, 10, 0, &FitParams::default())?;
    print!("{}", summarize(&setting, 400, &results).to_delimited(&setting));
    Ok(())
}
