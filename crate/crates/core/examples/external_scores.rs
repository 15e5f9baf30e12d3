//! Calibrating scores produced by some other model.

use std::collections::BTreeMap;

use ensured::data::{split, synth_classification};
use ensured::explainer::{CalibratedExplainer, ExplanationMode};
use ensured::model::{ExternalScores, ScoringModel, Task};

fn main() -> ensured::Result<()> {
    let synth = synth_classification(600, 11);
    let parts = split(&synth.dataset, 400, 5, 11)?;

    // A deliberately overconfident scorer: the true posterior pushed towards 0 and 1.
    let scores: BTreeMap<u64, f64> = synth
        .dataset
        .ids
        .iter()
        .zip(&synth.truth)
        .map(|(&id, &p)| (id, p * p * (3.0 - 2.0 * p)))
        .collect();
    let model = ScoringModel::External(ExternalScores::new(scores, Task::Classification)?);
    let explainer = CalibratedExplainer::new(model, &parts.calibration, ExplanationMode::Classification)?;

    for x in parts.test.instances() {
        let p = explainer.predict(&x)?;
        println!(
            "id {:>3}  true {:.3}  calibrated {:.3} [{:.3}, {:.3}]",
            x.id.unwrap_or_default(),
            x.values[0],
            p.estimate,
            p.low,
            p.high
        );
    }
    match explainer.explain_alternatives(&parts.test.instance(0)) {
        Err(e) => println!("alternatives: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
