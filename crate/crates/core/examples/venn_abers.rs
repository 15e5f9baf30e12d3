//! Probability intervals for a synthetic problem with a known posterior.

use ensured::calibration::VennAbers;
use ensured::data::{split, synth_classification};
use ensured::model::{train_forest, ForestParams, Task};

fn main() -> ensured::Result<()> {
    let synth = synth_classification(2000, 7);
    let parts = split(&synth.dataset, 500, 10, 7)?;
    let model = train_forest(&parts.proper_training, &ForestParams::default(), Task::Classification)?;

    let scores: Vec<f64> = parts
        .calibration
        .instances()
        .map(|x| model.score(&x))
        .collect::<ensured::Result<_>>()?;
    let va = VennAbers::new(&scores, &parts.calibration.labels())?;

    println!("{:>6} {:>6} {:>6} {:>6} {:>6}", "x1", "score", "low", "p", "high");
    for x in parts.test.instances() {
        let s = model.score(&x)?;
        let p = va.predict(s)?;
        println!("{:6.3} {s:6.3} {:6.3} {:6.3} {:6.3}", x.values[0], p.low, p.estimate, p.high);
    }
    Ok(())
}
