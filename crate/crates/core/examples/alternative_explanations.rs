//! Alternative rules for one wine, sorted into the six categories.

use ensured::data::{load_csv, split};
use ensured::explainer::{CalibratedExplainer, ExplanationMode};
use ensured::model::{train_forest, ForestParams, Task};
use ensured::triage::{triage_explanation, RankingWeight};

fn main() -> ensured::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/winequality-red.csv");
    let wine = load_csv(path, "quality", Task::Regression)?.binarize(6.0);
    let parts = split(&wine, 100, 1, 42)?;
    let model = train_forest(&parts.proper_training, &ForestParams::default(), Task::Classification)?;
    let explainer = CalibratedExplainer::new(model, &parts.calibration, ExplanationMode::Classification)?;

    let e = explainer.explain_alternatives(&parts.test.instance(0))?;
    let e = explainer.add_conjunctions(e, 2)?;
    println!("P(good) = {:.3} [{:.3}, {:.3}]", e.estimate, e.low, e.high);
    println!(
        "{} single and {} conjunctive rules",
        e.single_rules().count(),
        e.conjunctive_rules().count()
    );
    for t in triage_explanation(&e, RankingWeight::default())?.iter().filter(|t| !t.rule.is_conjunctive) {
        println!(
            "{:>4} {}  {:>36}  {:.3} [{:.3}, {:.3}]",
            t.category.short_name(),
            if t.ensured { "E" } else { " " },
            t.rule.condition.describe(explainer.schema()),
            t.rule.estimate,
            t.rule.low,
            t.rule.high,
        );
    }
    Ok(())
}
