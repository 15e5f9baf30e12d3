use serde::{Deserialize, Serialize};

use crate::explainer::ExplanationMode;
use crate::triage::Category;

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureValue {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub index: usize,
    pub condition: String,
    pub conjunctive: bool,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub uncertainty: f64,
    pub ensured: bool,
    /// Absent in interval mode and for a prediction of exactly 0.5.
    pub category: Option<Category>,
    pub p_hat: Option<f64>,
    pub rank: Option<f64>,
}

/// The document written to `explanations/<id>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub schema_version: u32,
    pub instance_id: u64,
    pub features: Vec<FeatureValue>,
    pub mode: ExplanationMode,
    pub prediction: PredictionReport,
    pub predicted_class: Option<String>,
    pub rules: Vec<RuleReport>,
    /// Rule indices chosen by the filter and ranking, best first.
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub id: u64,
    pub probability: f64,
    pub uncertainty: f64,
    pub predicted_class: String,
}

/// The document written to `global_map.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMapReport {
    pub schema_version: u32,
    pub mode: ExplanationMode,
    pub class_labels: [String; 2],
    pub points: Vec<MapPoint>,
}
