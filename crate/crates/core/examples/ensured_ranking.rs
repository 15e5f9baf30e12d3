//! How the ranking weight trades uncertainty against probability.

use ensured::data::{load_csv, split};
use ensured::explainer::{CalibratedExplainer, ExplanationMode};
use ensured::model::{train_forest, ForestParams, Task};
use ensured::triage::{filter_ensured, rank_rules, triage_explanation, RankingWeight};

fn main() -> ensured::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/winequality-red.csv");
    let wine = load_csv(path, "quality", Task::Regression)?.binarize(6.0);
    let parts = split(&wine, 500, 1, 42)?;
    let model = train_forest(&parts.proper_training, &ForestParams::default(), Task::Classification)?;
    let explainer = CalibratedExplainer::new(model, &parts.calibration, ExplanationMode::Classification)?;
    let e = explainer.explain_alternatives(&parts.test.instance(0))?;
    println!("P(good) = {:.3}, uncertainty {:.3}", e.estimate, e.uncertainty());

    for w in [-1.0, 0.0, 0.5, 1.0] {
        let w = RankingWeight::new(w)?;
        let triaged = triage_explanation(&e, w)?;
        println!("\nw = {}", w.value());
        for t in rank_rules(&triaged, w, 3) {
            println!(
                "  {:>32}  p_hat {:.3}  u {:.3}  rank {:+.3}",
                t.rule.condition.describe(explainer.schema()),
                t.p_hat,
                t.uncertainty,
                t.rank
            );
        }
    }
    let triaged = triage_explanation(&e, RankingWeight::default())?;
    println!("\n{} of {} rules are ensured", filter_ensured(&triaged).len(), triaged.len());
    Ok(())
}
