//! Fit, save the model document, load it back and predict.

use partwise::bpso::stream;
use partwise::{fit, generate, FitParams, FittedModel, SimSetting, Task};

fn main() -> partwise::Result<()> {
    let setting = SimSetting::reg2(4.0);
    let train = generate(&setting, 400, &mut stream(1, 0, 0))?;
    let test = generate(&setting, 50, &mut stream(2, 0, 0))?;

    let doc = fit(&train, Task::Regression, &FitParams::default())?.model.to_json()?;
    let model = FittedModel::from_json(&doc)?;
    assert_eq!(model.to_json()?, doc);

    for (i, p) in model.predict(&test)?.iter().enumerate().take(5) {
        println!("row {i}: region {} predicted {:8.3} observed {:8.3}", p.region, p.value, test.response()[i]);
    }
    let check = model.recompute_mdl(&train)?;
    println!("stored MDL {:.6}, recomputed {:.6}", model.mdl, check.total);
    Ok(())
}
