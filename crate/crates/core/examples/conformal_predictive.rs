//! Predictive distributions, intervals and threshold probabilities.

use ensured::calibration::{ConformalRegressor, TiePolicy};
use ensured::data::{split, synth_regression};
use ensured::model::{train_forest, ForestParams, Task};

fn main() -> ensured::Result<()> {
    let synth = synth_regression(2000, 3);
    let parts = split(&synth.dataset, 500, 5, 3)?;
    let model = train_forest(&parts.proper_training, &ForestParams::default(), Task::Regression)?;

    let predictions: Vec<f64> = parts
        .calibration
        .instances()
        .map(|x| model.score(&x))
        .collect::<ensured::Result<_>>()?;
    let cps = ConformalRegressor::from_predictions(&parts.calibration.target, &predictions, TiePolicy::Half)?;

    for (row, x) in parts.test.instances().enumerate() {
        let cpd = cps.cpd(model.score(&x)?);
        let (lo, hi) = cpd.interval_two_sided(0.1)?;
        println!(
            "y = {:6.2}  median {:6.2}  90% [{lo:6.2}, {hi:6.2}]  P(y < 5) = {:.3}",
            parts.test.target[row],
            cpd.median(),
            cpd.threshold_probability(5.0),
        );
    }
    Ok(())
}
