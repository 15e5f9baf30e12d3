//! Sorting alternative rules by what they would do to the prediction.
//!
//! Each rule lands in one of six categories (counter, semi or super, each
//! factual or potential), is flagged as ensured when it is less uncertain
//! than the original prediction, and gets a rank that trades uncertainty
//! against the probability of the predicted class.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::calibration::EstimateMode;
use crate::explainer::{Explanation, ExplanationKind, FeatureRule};
use crate::{Error, Result};

/// Slack for round-off when testing region membership.
const FEASIBLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    CounterFactual,
    CounterPotential,
    SemiFactual,
    SemiPotential,
    SuperFactual,
    SuperPotential,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::CounterFactual,
        Category::CounterPotential,
        Category::SemiFactual,
        Category::SemiPotential,
        Category::SuperFactual,
        Category::SuperPotential,
    ];

    pub fn kind(self) -> CategoryKind {
        match self {
            Category::CounterFactual | Category::CounterPotential => CategoryKind::Counter,
            Category::SemiFactual | Category::SemiPotential => CategoryKind::Semi,
            Category::SuperFactual | Category::SuperPotential => CategoryKind::Super,
        }
    }

    pub fn is_potential(self) -> bool {
        matches!(
            self,
            Category::CounterPotential | Category::SemiPotential | Category::SuperPotential
        )
    }

    /// Column label used in summary tables.
    pub fn short_name(self) -> &'static str {
        match self {
            Category::CounterFactual => "CoFa",
            Category::CounterPotential => "CoPo",
            Category::SemiFactual => "SeFa",
            Category::SemiPotential => "SePo",
            Category::SuperFactual => "SuFa",
            Category::SuperPotential => "SuPo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryKind {
    Counter,
    Semi,
    Super,
}

/// Ranking weight `w` in `[-1, 1]`: `0` ranks by uncertainty alone, `1` by
/// probability of the predicted class, `-1` by its complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingWeight(f64);

impl RankingWeight {
    pub fn new(w: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&w) {
            return Err(Error::InvalidWeight(w));
        }
        Ok(Self(w))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for RankingWeight {
    fn default() -> Self {
        Self(0.5)
    }
}

/// An alternative rule with its triage attributes. `index` is the rule's
/// position in the explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriagedRule {
    pub rule: FeatureRule,
    pub category: Category,
    pub ensured: bool,
    pub rank: f64,
    pub p_hat: f64,
    pub uncertainty: f64,
    pub index: usize,
}

/// Probability of whichever class `p` predicts.
pub fn predicted_class_prob(p: f64) -> f64 {
    p.max(1.0 - p)
}

/// Places a rule in the six-way taxonomy relative to the original estimate.
pub fn categorize(rule: &FeatureRule, original_estimate: f64) -> Result<Category> {
    if original_estimate == 0.5 {
        return Err(Error::UndefinedTaxonomy);
    }
    let sign = if original_estimate > 0.5 { 1.0 } else { -1.0 };
    let d_orig = sign * (original_estimate - 0.5);
    let d_est = sign * (rule.estimate - 0.5);
    let potential = rule.low < 0.5 && 0.5 < rule.high;
    let category = match (potential, d_est <= 0.0, d_est < d_orig) {
        (false, true, _) => Category::CounterFactual,
        (false, false, true) => Category::SemiFactual,
        (false, false, false) => Category::SuperFactual,
        (true, true, _) => Category::CounterPotential,
        (true, false, true) => Category::SemiPotential,
        (true, false, false) => Category::SuperPotential,
    };
    Ok(category)
}

pub fn is_ensured(rule_uncertainty: f64, original_uncertainty: f64) -> bool {
    rule_uncertainty < original_uncertainty
}

/// `(1 - |w|)(1 - U) + |w| * (±P̂)`, with the sign of `w`.
pub fn rank_score(p_hat: f64, uncertainty: f64, w: RankingWeight) -> f64 {
    let w = w.value();
    let a = w.abs();
    let p = if w < 0.0 { -p_hat } else { p_hat };
    (1.0 - a) * (1.0 - uncertainty) + a * p
}

/// Whether an (estimate, uncertainty) pair can come out of a probability
/// interval inside `[0, 1]`.
pub fn feasible(p: f64, u: f64, mode: EstimateMode) -> bool {
    let t = FEASIBLE_TOLERANCE;
    match mode {
        EstimateMode::Mean => u <= 2.0 * p.min(1.0 - p) + t,
        EstimateMode::Regularised => u / (1.0 + u) <= p + t && p <= 1.0 / (1.0 + u) + t,
    }
}

/// Triages every rule of an alternative explanation in a probabilistic mode.
/// `p_hat` is the rule's probability for the class the original estimate
/// predicts.
pub fn triage_explanation(explanation: &Explanation, w: RankingWeight) -> Result<Vec<TriagedRule>> {
    if explanation.kind != ExplanationKind::Alternative {
        return Err(Error::NotAlternative);
    }
    if !explanation.mode.is_probabilistic() {
        return Err(Error::NotProbabilistic);
    }
    let positive = explanation.estimate > 0.5;
    let original_u = explanation.uncertainty();
    explanation
        .rules
        .iter()
        .enumerate()
        .map(|(index, rule)| {
            let category = categorize(rule, explanation.estimate)?;
            let p_hat = if positive { rule.estimate } else { 1.0 - rule.estimate };
            let uncertainty = rule.uncertainty();
            Ok(TriagedRule {
                rule: rule.clone(),
                category,
                ensured: is_ensured(uncertainty, original_u),
                rank: rank_score(p_hat, uncertainty, w),
                p_hat,
                uncertainty,
                index,
            })
        })
        .collect()
}

fn rank_order(a: &TriagedRule, b: &TriagedRule) -> Ordering {
    b.rank
        .total_cmp(&a.rank)
        .then(a.uncertainty.total_cmp(&b.uncertainty))
        .then(a.index.cmp(&b.index))
}

/// The `top_k` best rules under `w`, best first. Ties go to the less
/// uncertain rule, then to the earlier one.
pub fn rank_rules(rules: &[TriagedRule], w: RankingWeight, top_k: usize) -> Vec<TriagedRule> {
    let mut out: Vec<TriagedRule> = rules
        .iter()
        .map(|r| TriagedRule {
            rank: rank_score(r.p_hat, r.uncertainty, w),
            ..r.clone()
        })
        .collect();
    out.sort_by(rank_order);
    out.truncate(top_k);
    out
}

pub fn filter_category(rules: &[TriagedRule], kind: CategoryKind, include_potential: bool) -> Vec<TriagedRule> {
    rules
        .iter()
        .filter(|r| r.category.kind() == kind && (include_potential || !r.category.is_potential()))
        .cloned()
        .collect()
}

pub fn filter_ensured(rules: &[TriagedRule]) -> Vec<TriagedRule> {
    rules.iter().filter(|r| r.ensured).cloned().collect()
}
