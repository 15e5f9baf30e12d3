//! Probabilistic alternatives for house values around a price threshold.

use ensured::data::{load_csv, split};
use ensured::explainer::{CalibratedExplainer, ExplanationMode};
use ensured::model::{train_forest, ForestParams, Task};
use ensured::triage::{rank_rules, triage_explanation, RankingWeight};

fn main() -> ensured::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/california_housing.csv");
    let housing = load_csv(path, "MedHouseValK", Task::Regression)?.subsample(4000, 1);
    let parts = split(&housing, 500, 1, 1)?;
    let model = train_forest(&parts.proper_training, &ForestParams::default(), Task::Regression)?;
    let mode = ExplanationMode::regression_threshold(250.0)?;
    let explainer = CalibratedExplainer::new(model, &parts.calibration, mode)?;

    let e = explainer.explain_alternatives(&parts.test.instance(0))?;
    println!("actual value {:.0}k", parts.test.target[0]);
    println!("P(y < 250k) = {:.3} [{:.3}, {:.3}]", e.estimate, e.low, e.high);
    let w = RankingWeight::default();
    for t in rank_rules(&triage_explanation(&e, w)?, w, 5) {
        println!(
            "{:>4}  {:>28}  {:.3} [{:.3}, {:.3}]",
            t.category.short_name(),
            t.rule.condition.describe(explainer.schema()),
            t.rule.estimate,
            t.rule.low,
            t.rule.high
        );
    }

    let interval = CalibratedExplainer::new(
        train_forest(&parts.proper_training, &ForestParams::default(), Task::Regression)?,
        &parts.calibration,
        ExplanationMode::regression_interval(0.1)?,
    )?;
    let p = interval.predict(&parts.test.instance(0))?;
    println!("\nmedian {:.0}k, 90% interval [{:.0}k, {:.0}k]", p.estimate, p.low, p.high);
    Ok(())
}
