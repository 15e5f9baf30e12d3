use std::collections::HashMap;

use super::{
    discretize_feature, Atom, Calibrator, Condition, Explanation, ExplanationKind, ExplanationMode, FeatureRule,
    Predicate, Prediction,
};
use crate::calibration::TiePolicy;
use crate::data::{Dataset, FeatureKind, Schema};
use crate::model::{FeatureVector, ScoringModel};
use crate::{Error, Result};

/// Largest number of values per feature used when two rules are combined.
const CONJUNCTION_SUPPORT: usize = 8;

/// The values substituted into one feature, with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub feature: usize,
    pub support: Vec<(f64, f64)>,
}

impl Perturbation {
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// At most `k` weighted quantile representatives of the support. The
    /// support is returned unchanged when it has `k` values or fewer.
    pub fn reduced(&self, k: usize) -> Perturbation {
        if self.support.len() <= k {
            return self.clone();
        }
        let total: f64 = self.support.iter().map(|s| s.1).sum();
        let mut support: Vec<(f64, f64)> = Vec::with_capacity(k);
        let mut cumulative = 0.0;
        let mut idx = 0;
        for j in 0..k {
            let level = (j as f64 + 0.5) / k as f64 * total;
            while idx + 1 < self.support.len() && cumulative + self.support[idx].1 < level {
                cumulative += self.support[idx].1;
                idx += 1;
            }
            let value = self.support[idx].0;
            match support.last_mut() {
                Some(last) if last.0 == value => last.1 += total / k as f64,
                _ => support.push((value, total / k as f64)),
            }
        }
        Perturbation {
            feature: self.feature,
            support,
        }
    }
}

/// Explains instances of one model through a calibrator fitted on a
/// calibration set. Immutable after construction; share it freely across
/// threads.
#[derive(Debug, Clone)]
pub struct CalibratedExplainer {
    model: ScoringModel,
    calibrator: Calibrator,
    mode: ExplanationMode,
    schema: Schema,
    /// Sorted calibration values per feature.
    columns: Vec<Vec<f64>>,
}

impl CalibratedExplainer {
    pub fn new(model: ScoringModel, calibration: &Dataset, mode: ExplanationMode) -> Result<Self> {
        Self::with_tie_policy(model, calibration, mode, TiePolicy::Half)
    }

    pub fn with_tie_policy(
        model: ScoringModel,
        calibration: &Dataset,
        mode: ExplanationMode,
        tie_policy: TiePolicy,
    ) -> Result<Self> {
        let calibrator = Calibrator::fit(&model, calibration, mode, tie_policy)?;
        let columns = (0..calibration.n_features())
            .map(|f| {
                let mut c = calibration.column(f);
                c.sort_by(f64::total_cmp);
                c
            })
            .collect();
        Ok(Self {
            model,
            calibrator,
            mode,
            schema: calibration.schema.clone(),
            columns,
        })
    }

    pub fn mode(&self) -> ExplanationMode {
        self.mode
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn model(&self) -> &ScoringModel {
        &self.model
    }

    pub fn calibrator(&self) -> &Calibrator {
        &self.calibrator
    }

    /// Calibrated prediction for the instance as it is.
    pub fn predict(&self, instance: &FeatureVector) -> Result<Prediction> {
        self.calibrator.calibrate(self.model.score(instance)?, self.mode)
    }

    /// Values substituted for an atom: every distinct calibration value
    /// that satisfies it, weighted by frequency, or the category itself.
    pub fn perturbation(&self, atom: &Atom) -> Perturbation {
        let support = match atom.predicate {
            Predicate::Equals(v) | Predicate::Is(v) => vec![(v, 1.0)],
            p => {
                let mut out: Vec<(f64, f64)> = Vec::new();
                for &v in self.columns[atom.feature].iter().filter(|&&v| p.holds(v)) {
                    match out.last_mut() {
                        Some(last) if last.0 == v => last.1 += 1.0,
                        _ => out.push((v, 1.0)),
                    }
                }
                out
            }
        };
        Perturbation {
            feature: atom.feature,
            support,
        }
    }

    /// Predicates that move `value` of `feature` elsewhere.
    fn alternatives_for(&self, feature: usize, value: f64) -> Vec<Predicate> {
        match self.schema.kinds[feature] {
            FeatureKind::Categorical => (0..self.schema.categories[feature].len())
                .map(|c| c as f64)
                .filter(|&c| c != value)
                .map(Predicate::Equals)
                .collect(),
            FeatureKind::Numeric => discretize_feature(&self.columns[feature], value),
        }
    }

    fn check_instance(&self, instance: &FeatureVector) -> Result<()> {
        if !self.model.supports_rescoring() {
            return Err(Error::AlternativesRequireRescoring);
        }
        if instance.len() != self.schema.len() {
            return Err(Error::ArityMismatch {
                expected: self.schema.len(),
                got: instance.len(),
            });
        }
        Ok(())
    }

    /// One rule per alternative region of each feature, in feature order.
    pub fn explain_alternatives(&self, instance: &FeatureVector) -> Result<Explanation> {
        self.check_instance(instance)?;
        let mut session = Session::new(self);
        let original = session.predict(&instance.values)?;
        let mut rules = Vec::new();
        for f in 0..self.schema.len() {
            for predicate in self.alternatives_for(f, instance.values[f]) {
                let atom = Atom { feature: f, predicate };
                let pert = self.perturbation(&atom);
                if pert.is_empty() {
                    continue;
                }
                let p = session.evaluate(&instance.values, &[pert])?;
                rules.push(FeatureRule {
                    condition: Condition { atoms: vec![atom] },
                    estimate: p.estimate,
                    low: p.low,
                    high: p.high,
                    is_conjunctive: false,
                });
            }
        }
        Ok(Explanation {
            instance: instance.clone(),
            mode: self.mode,
            estimate: original.estimate,
            low: original.low,
            high: original.high,
            rules,
            kind: ExplanationKind::Alternative,
        })
    }

    /// One weight per feature: the original estimate minus the estimate
    /// averaged over all of that feature's perturbations.
    pub fn explain_factual(&self, instance: &FeatureVector) -> Result<Explanation> {
        self.check_instance(instance)?;
        let mut session = Session::new(self);
        let original = session.predict(&instance.values)?;
        let mut rules = Vec::new();
        for f in 0..self.schema.len() {
            let mut support = Vec::new();
            for predicate in self.alternatives_for(f, instance.values[f]) {
                support.extend(self.perturbation(&Atom { feature: f, predicate }).support);
            }
            if support.is_empty() {
                continue;
            }
            let p = session.evaluate(&instance.values, &[Perturbation { feature: f, support }])?;
            rules.push(FeatureRule {
                condition: Condition::single(f, Predicate::Is(instance.values[f])),
                estimate: original.estimate - p.estimate,
                low: original.estimate - p.high,
                high: original.estimate - p.low,
                is_conjunctive: false,
            });
        }
        Ok(Explanation {
            instance: instance.clone(),
            mode: self.mode,
            estimate: original.estimate,
            low: original.low,
            high: original.high,
            rules,
            kind: ExplanationKind::Factual,
        })
    }

    /// Appends a rule for every pair of single rules on distinct features,
    /// perturbing both features jointly.
    pub fn add_conjunctions(&self, mut explanation: Explanation, max_order: usize) -> Result<Explanation> {
        if explanation.kind != ExplanationKind::Alternative {
            return Err(Error::NotAlternative);
        }
        if max_order > 2 {
            return Err(Error::UnsupportedConjunctionOrder(max_order));
        }
        if max_order < 2 {
            return Ok(explanation);
        }
        self.check_instance(&explanation.instance)?;
        let singles: Vec<Atom> = explanation
            .single_rules()
            .filter_map(|r| r.condition.atoms.first().copied())
            .collect();
        let reduced: Vec<Perturbation> = singles
            .iter()
            .map(|a| self.perturbation(a).reduced(CONJUNCTION_SUPPORT))
            .collect();
        let mut session = Session::new(self);
        let mut added = Vec::new();
        for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                if singles[i].feature == singles[j].feature {
                    continue;
                }
                let p = session.evaluate(
                    &explanation.instance.values,
                    &[reduced[i].clone(), reduced[j].clone()],
                )?;
                added.push(FeatureRule {
                    condition: Condition {
                        atoms: vec![singles[i], singles[j]],
                    },
                    estimate: p.estimate,
                    low: p.low,
                    high: p.high,
                    is_conjunctive: true,
                });
            }
        }
        explanation.rules.extend(added);
        Ok(explanation)
    }
}

/// Per-instance scoring state: a cache from raw score to calibrated
/// prediction, since forests emit few distinct scores.
struct Session<'a> {
    explainer: &'a CalibratedExplainer,
    cache: HashMap<u64, Prediction>,
}

impl<'a> Session<'a> {
    fn new(explainer: &'a CalibratedExplainer) -> Self {
        Self {
            explainer,
            cache: HashMap::new(),
        }
    }

    fn predict(&mut self, values: &[f64]) -> Result<Prediction> {
        let score = self.explainer.model.score_values(values)?;
        if let Some(p) = self.cache.get(&score.to_bits()) {
            return Ok(*p);
        }
        let p = self.explainer.calibrator.calibrate(score, self.explainer.mode)?;
        self.cache.insert(score.to_bits(), p);
        Ok(p)
    }

    /// Weighted aggregate over the cross product of the perturbations.
    fn evaluate(&mut self, base: &[f64], perturbations: &[Perturbation]) -> Result<Prediction> {
        let mut values = base.to_vec();
        let mut parts = Vec::new();
        let mut counters = vec![0usize; perturbations.len()];
        loop {
            let mut weight = 1.0;
            for (p, &c) in perturbations.iter().zip(&counters) {
                let (v, w) = p.support[c];
                values[p.feature] = v;
                weight *= w;
            }
            parts.push((self.predict(&values)?, weight));
            let mut k = 0;
            loop {
                if k == counters.len() {
                    return Ok(self.explainer.calibrator.aggregate(&parts));
                }
                counters[k] += 1;
                if counters[k] < perturbations[k].support.len() {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_classification, synth_regression};
    use crate::model::{train_forest, DecisionTree, ForestParams, Node, RandomForest, Task};

    /// Two categorical features, three categories each; the score depends
    /// only on feature 0.
    fn categorical_setup() -> (CalibratedExplainer, FeatureVector) {
        let schema = Schema {
            names: vec!["a".into(), "b".into()],
            kinds: vec![FeatureKind::Categorical; 2],
            categories: vec![vec!["p".into(), "q".into(), "r".into()]; 2],
        };
        let tree = DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            Node::Leaf { value: 0.2 },
            Node::Leaf { value: 0.8 },
        ]);
        let model = ScoringModel::Forest(RandomForest::from_trees(vec![tree], Task::Classification, 2));
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 3) as f64, ((i / 3) % 3) as f64]).collect();
        let target = rows.iter().enumerate().map(|(i, r)| f64::from(r[0] > 0.5 && i % 4 != 0)).collect();
        let cal = Dataset::new(schema, rows, target, "y", Task::Classification).unwrap();
        let ex = CalibratedExplainer::new(model, &cal, ExplanationMode::Classification).unwrap();
        (ex, FeatureVector::anonymous(vec![1.0, 1.0]))
    }

    #[test]
    fn categorical_rule_count() {
        let (ex, x) = categorical_setup();
        let e = ex.explain_alternatives(&x).unwrap();
        assert_eq!(e.rules.len(), 4);
        for r in &e.rules {
            assert!(!r.condition.covers(&x.values));
        }
    }

    #[test]
    fn ignored_feature_is_a_no_op() {
        let (ex, x) = categorical_setup();
        let e = ex.explain_alternatives(&x).unwrap();
        for r in e.rules.iter().filter(|r| r.condition.atoms[0].feature == 1) {
            assert!((r.estimate - e.estimate).abs() < 1e-12);
            assert!((r.low - e.low).abs() < 1e-12);
            assert!((r.high - e.high).abs() < 1e-12);
        }
        let f = ex.explain_factual(&x).unwrap();
        let w = &f.rules[1];
        assert!(w.estimate.abs() < 1e-12);
        assert!((w.uncertainty() - f.uncertainty()).abs() < 1e-12);
    }

    #[test]
    fn lowering_perturbation_gives_positive_weight() {
        let (ex, x) = categorical_setup();
        let f = ex.explain_factual(&x).unwrap();
        // moving feature 0 to `p` drops the score, so the instance's value
        // supports the prediction
        let w = &f.rules[0];
        assert!(w.estimate > 0.0);
        assert!(w.low <= w.estimate && w.estimate <= w.high);
    }

    #[test]
    fn conjunction_counts() {
        let (ex, x) = categorical_setup();
        let e = ex.explain_alternatives(&x).unwrap();
        let e = ex.add_conjunctions(e, 2).unwrap();
        // two rules per feature, pairs only across features
        assert_eq!(e.conjunctive_rules().count(), 4);
        for r in e.conjunctive_rules() {
            let fs: Vec<usize> = r.condition.features().collect();
            assert_ne!(fs[0], fs[1]);
        }
        let three = Explanation {
            rules: e.single_rules().filter(|r| r.condition.atoms[0].feature == 0).cloned().collect(),
            ..e.clone()
        };
        assert_eq!(ex.add_conjunctions(three, 2).unwrap().conjunctive_rules().count(), 0);
        assert!(matches!(ex.add_conjunctions(e.clone(), 3), Err(Error::UnsupportedConjunctionOrder(3))));
        let f = ex.explain_factual(&x).unwrap();
        assert!(matches!(ex.add_conjunctions(f, 2), Err(Error::NotAlternative)));
    }

    #[test]
    fn conjunction_of_no_ops_keeps_estimate() {
        let (ex, x) = synth_setup();
        let e = ex.explain_alternatives(&x).unwrap();
        let e = ex.add_conjunctions(e, 2).unwrap();
        let no_ops: Vec<&FeatureRule> = e
            .conjunctive_rules()
            .filter(|r| r.condition.features().all(|f| f != 0))
            .collect();
        assert!(!no_ops.is_empty());
        for r in no_ops {
            assert!((r.estimate - e.estimate).abs() < 1e-12);
        }
    }

    /// A classifier whose forest ignores every feature but the first.
    fn synth_setup() -> (CalibratedExplainer, FeatureVector) {
        let data = synth_classification(600, 4).dataset;
        let mut rows = data.rows.clone();
        for (i, r) in rows.iter_mut().enumerate() {
            r.push((i % 7) as f64);
        }
        let schema = Schema::numeric(vec!["x1".into(), "x2".into(), "x3".into()]);
        let ds = Dataset::new(schema, rows, data.target.clone(), "y", Task::Classification).unwrap();
        let tree = DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            Node::Leaf { value: 0.3 },
            Node::Leaf { value: 0.7 },
        ]);
        let model = ScoringModel::Forest(RandomForest::from_trees(vec![tree], Task::Classification, 3));
        let cal = ds.subset(&(0..300).collect::<Vec<_>>());
        let ex = CalibratedExplainer::new(model, &cal, ExplanationMode::Classification).unwrap();
        (ex, FeatureVector::anonymous(vec![0.8, 0.5, 3.0]))
    }

    #[test]
    fn numeric_rules_per_feature() {
        let (ex, x) = synth_setup();
        let e = ex.explain_alternatives(&x).unwrap();
        for f in 0..3 {
            assert!(e.rules.iter().filter(|r| r.condition.atoms[0].feature == f).count() <= 2);
        }
        for r in &e.rules {
            assert!(r.low <= r.estimate && r.estimate <= r.high);
            assert!(!r.condition.covers(&x.values));
        }
        // the median of x2 sits between two deciles, one rule per side
        assert_eq!(e.rules.iter().filter(|r| r.condition.atoms[0].feature == 1).count(), 2);
    }

    #[test]
    fn explanations_are_deterministic() {
        let data = synth_classification(400, 9).dataset;
        let train = data.subset(&(0..300).collect::<Vec<_>>());
        let cal = data.subset(&(300..400).collect::<Vec<_>>());
        let params = ForestParams {
            n_trees: 10,
            ..ForestParams::default()
        };
        let build = || {
            let model = train_forest(&train, &params, Task::Classification).unwrap();
            let ex = CalibratedExplainer::new(model, &cal, ExplanationMode::Classification).unwrap();
            let x = cal.instance(0);
            (ex.explain_factual(&x).unwrap(), ex.explain_alternatives(&x).unwrap())
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn regression_modes() {
        let data = synth_regression(700, 2).dataset;
        let train = data.subset(&(0..500).collect::<Vec<_>>());
        let cal = data.subset(&(500..700).collect::<Vec<_>>());
        let params = ForestParams {
            n_trees: 10,
            ..ForestParams::default()
        };
        let model = train_forest(&train, &params, Task::Regression).unwrap();
        let ex = CalibratedExplainer::new(model.clone(), &cal, ExplanationMode::RegressionInterval { epsilon: 0.1 }).unwrap();
        let e = ex.explain_alternatives(&cal.instance(3)).unwrap();
        assert!(e.low <= e.estimate && e.estimate <= e.high);
        for r in &e.rules {
            assert!(r.low <= r.estimate && r.estimate <= r.high);
        }
        let ex = CalibratedExplainer::new(model, &cal, ExplanationMode::RegressionThreshold { threshold: 5.0 }).unwrap();
        let e = ex.explain_alternatives(&cal.instance(3)).unwrap();
        assert!(0.0 <= e.low && e.high <= 1.0);
    }

    #[test]
    fn external_scores_cannot_be_perturbed() {
        let (ex, x) = categorical_setup();
        let cal_ids: std::collections::BTreeMap<u64, f64> = (0..30).map(|i| (i, 0.5)).collect();
        let model = ScoringModel::External(crate::model::ExternalScores::new(cal_ids, Task::Classification).unwrap());
        let cal = Dataset::new(
            ex.schema().clone(),
            (0..30).map(|i| vec![(i % 3) as f64, 0.0]).collect(),
            (0..30).map(|i| f64::from(i % 2 == 0)).collect(),
            "y",
            Task::Classification,
        )
        .unwrap();
        let ext = CalibratedExplainer::new(model, &cal, ExplanationMode::Classification).unwrap();
        assert!(ext.predict(&cal.instance(0)).is_ok());
        let err = ext.explain_alternatives(&x).unwrap_err();
        assert_eq!(err.to_string(), "alternatives require rescoring");
    }

    #[test]
    fn reduction_is_exact_for_small_support() {
        let p = Perturbation {
            feature: 0,
            support: vec![(1.0, 2.0), (2.0, 1.0)],
        };
        assert_eq!(p.reduced(8), p);
        let big = Perturbation {
            feature: 0,
            support: (0..100).map(|i| (i as f64, 1.0)).collect(),
        };
        let r = big.reduced(8);
        assert_eq!(r.support.len(), 8);
        assert!((r.support.iter().map(|s| s.1).sum::<f64>() - 100.0).abs() < 1e-9);
        assert_eq!(r.support[0].0, 6.0);
    }
}
