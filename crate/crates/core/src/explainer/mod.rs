//! Factual and alternative explanations by single-feature perturbation.
//!
//! A [`CalibratedExplainer`] wraps a scoring model and a [`Calibrator`]
//! fitted on held-out data. For one instance it reports the calibrated
//! prediction with its uncertainty interval and a list of rules, each the
//! calibrated prediction obtained when the instance is moved into the rule's
//! region of one (or, for conjunctions, two) features.

mod calibrator;
mod discretize;
mod explain;

use serde::{Deserialize, Serialize};

pub use calibrator::{calibrated_predict, Calibrator, Prediction};
pub use discretize::{decile_boundaries, discretize_feature};
pub use explain::{CalibratedExplainer, Perturbation};

use crate::data::{format_number, Schema};
use crate::model::FeatureVector;
use crate::{Error, Result};

/// What the calibrated number means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplanationMode {
    /// Probability of the positive class.
    Classification,
    /// Median of the predictive distribution with a two-sided interval at
    /// significance `epsilon`.
    RegressionInterval { epsilon: f64 },
    /// Probability that the target lies below `threshold`.
    RegressionThreshold { threshold: f64 },
}

impl ExplanationMode {
    pub fn regression_interval(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self::RegressionInterval { epsilon })
    }

    pub fn regression_threshold(threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::NonFinite(threshold));
        }
        Ok(Self::RegressionThreshold { threshold })
    }

    /// Whether estimates are probabilities in `[0, 1]`.
    pub fn is_probabilistic(&self) -> bool {
        !matches!(self, Self::RegressionInterval { .. })
    }
}

/// One side of a rule on a single feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Predicate {
    /// Categorical feature takes the category with this index.
    Equals(f64),
    LessThan(f64),
    AtLeast(f64),
    /// The instance's own value, used by factual rules.
    Is(f64),
}

impl Predicate {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Predicate::Equals(c) | Predicate::Is(c) => value == c,
            Predicate::LessThan(b) => value < b,
            Predicate::AtLeast(b) => value >= b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub feature: usize,
    pub predicate: Predicate,
}

impl Atom {
    pub fn describe(&self, schema: &Schema) -> String {
        let name = &schema.names[self.feature];
        match self.predicate {
            Predicate::Equals(c) | Predicate::Is(c) => {
                format!("{name} = {}", schema.format_value(self.feature, c))
            }
            Predicate::LessThan(b) => format!("{name} < {}", format_number(b)),
            Predicate::AtLeast(b) => format!("{name} >= {}", format_number(b)),
        }
    }
}

/// A single atom or a conjunction of atoms on distinct features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub atoms: Vec<Atom>,
}

impl Condition {
    pub fn single(feature: usize, predicate: Predicate) -> Self {
        Self {
            atoms: vec![Atom { feature, predicate }],
        }
    }

    pub fn features(&self) -> impl Iterator<Item = usize> + '_ {
        self.atoms.iter().map(|a| a.feature)
    }

    /// Whether the condition holds for the given feature values.
    pub fn covers(&self, values: &[f64]) -> bool {
        self.atoms.iter().all(|a| a.predicate.holds(values[a.feature]))
    }

    pub fn describe(&self, schema: &Schema) -> String {
        self.atoms
            .iter()
            .map(|a| a.describe(schema))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

/// A rule with its calibrated number and interval. For alternative rules
/// these are the prediction under the rule; for factual rules they are the
/// feature weight and its interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRule {
    pub condition: Condition,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub is_conjunctive: bool,
}

impl FeatureRule {
    pub fn uncertainty(&self) -> f64 {
        self.high - self.low
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationKind {
    Factual,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub instance: FeatureVector,
    pub mode: ExplanationMode,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub rules: Vec<FeatureRule>,
    pub kind: ExplanationKind,
}

impl Explanation {
    pub fn uncertainty(&self) -> f64 {
        self.high - self.low
    }

    pub fn prediction(&self) -> Prediction {
        Prediction {
            estimate: self.estimate,
            low: self.low,
            high: self.high,
        }
    }

    pub fn single_rules(&self) -> impl Iterator<Item = &FeatureRule> {
        self.rules.iter().filter(|r| !r.is_conjunctive)
    }

    pub fn conjunctive_rules(&self) -> impl Iterator<Item = &FeatureRule> {
        self.rules.iter().filter(|r| r.is_conjunctive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema {
            names: vec!["petal width".into(), "colour".into()],
            kinds: vec![crate::data::FeatureKind::Numeric, crate::data::FeatureKind::Categorical],
            categories: vec![vec![], vec!["blue".into(), "red".into()]],
        }
    }

    #[test]
    fn condition_text() {
        let c = Condition {
            atoms: vec![
                Atom {
                    feature: 0,
                    predicate: Predicate::LessThan(1.6),
                },
                Atom {
                    feature: 1,
                    predicate: Predicate::Equals(1.0),
                },
            ],
        };
        assert_eq!(c.describe(&schema()), "petal width < 1.6 & colour = red");
        assert_eq!(
            Condition::single(0, Predicate::AtLeast(1.8)).describe(&schema()),
            "petal width >= 1.8"
        );
        assert!(c.covers(&[1.0, 1.0]));
        assert!(!c.covers(&[1.6, 1.0]));
    }

    #[test]
    fn mode_validation() {
        assert!(ExplanationMode::regression_interval(0.1).is_ok());
        assert!(matches!(ExplanationMode::regression_interval(1.0), Err(Error::InvalidEpsilon(_))));
        assert!(ExplanationMode::regression_interval(0.0).is_err());
        assert!(ExplanationMode::Classification.is_probabilistic());
        assert!(ExplanationMode::regression_threshold(500.0).unwrap().is_probabilistic());
        assert!(!ExplanationMode::RegressionInterval { epsilon: 0.1 }.is_probabilistic());
    }
}
