use partwise::bpso::stream;
use partwise::{fit, generate, FitParams, SimSetting, Task};

fn main() -> partwise::Result<()> {
    let data = generate(&SimSetting::cls2(Task::Logistic), 400, &mut stream(3, 0, 0))?;
    let model = fit(&data, Task::Logistic, &FitParams { seed: 11, ..FitParams::default() })?.model;

    println!("{} regions, MDL {:.2} bits", model.region_count(), model.mdl);
    for (r, f) in model.fits.iter().enumerate() {
        println!("region {r}: mask {:?} beta {:.3?}", f.mask, f.beta);
    }
    let p = model.predict_point(&[5.0, 10.0, 2.0]);
    println!("x = (5, 10, 2): region {} p = {:.3}", p.region, p.probability.unwrap());
    Ok(())
}
