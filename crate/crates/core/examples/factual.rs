//! Factual feature weights with uncertainty on the red wine data.

use ensured::data::{load_csv, split};
use ensured::explainer::{CalibratedExplainer, ExplanationMode};
use ensured::model::{train_forest, ForestParams, Task};

fn main() -> ensured::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/winequality-red.csv");
    let wine = load_csv(path, "quality", Task::Regression)?.binarize(6.0);
    let parts = split(&wine, 500, 1, 42)?;
    let model = train_forest(&parts.proper_training, &ForestParams::default(), Task::Classification)?;
    let explainer = CalibratedExplainer::new(model, &parts.calibration, ExplanationMode::Classification)?;

    let e = explainer.explain_factual(&parts.test.instance(0))?;
    println!("P(good) = {:.3} [{:.3}, {:.3}]", e.estimate, e.low, e.high);
    let mut rules = e.rules.clone();
    rules.sort_by(|a, b| b.estimate.abs().total_cmp(&a.estimate.abs()));
    for r in rules {
        println!(
            "{:>32}  weight {:+.3} [{:+.3}, {:+.3}]",
            r.condition.describe(explainer.schema()),
            r.estimate,
            r.low,
            r.high
        );
    }
    Ok(())
}
