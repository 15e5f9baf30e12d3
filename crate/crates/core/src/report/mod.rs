//! Run configuration, report documents and the five commands behind the
//! `ensured` binary.

mod commands;
mod json;
mod plots;
mod summary;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use commands::{
    cmd_explain, cmd_global_map, cmd_rank_plot, cmd_region_heatmap, cmd_summary, explain_test_set, prepare,
    select_rules, ExplainLog, InstanceResult, Prepared,
};
pub use json::{FeatureValue, GlobalMapReport, InstanceReport, MapPoint, PredictionReport, RuleReport, SCHEMA_VERSION};
pub use plots::{
    bars_svg, category_colour, global_map_svg, heatmap_svg, heatmap_values, rank_scatter_svg, HEATMAP_CELLS,
};
pub use summary::{RuleSet, SummaryRow, SummaryTable};

use crate::explainer::ExplanationMode;
use crate::model::Task;
use crate::triage::RankingWeight;
use crate::{Error, Result};

/// Which rules compete for the top-k selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFilter {
    Counter,
    Semi,
    Super,
    Ensured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
            svg: true,
        }
    }
}

impl std::str::FromStr for Formats {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut f = Formats {
            json: false,
            csv: false,
            svg: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "json" => f.json = true,
                "csv" => f.csv = true,
                "svg" => f.svg = true,
                other => return Err(Error::Config(format!("unknown output format `{other}`"))),
            }
        }
        Ok(f)
    }
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    /// Target column; the last column when absent.
    pub target: Option<String>,
    pub task: Task,
    /// Turns a numeric target into classes `target >= value`.
    pub positive_from: Option<f64>,
    pub threshold: Option<f64>,
    pub epsilon: Option<f64>,
    pub cal_size: usize,
    pub test_size: usize,
    pub seed: u64,
    pub conjunctions: bool,
    pub weight: RankingWeight,
    pub top_k: usize,
    pub filter: Option<RuleFilter>,
    pub include_potential: bool,
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub trees: usize,
    /// Random subsample of the dataset taken before splitting.
    pub max_rows: Option<usize>,
    /// `id,score` file used instead of training a forest.
    pub scores: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            target: None,
            task: Task::Classification,
            positive_from: None,
            threshold: None,
            epsilon: None,
            cal_size: 100,
            test_size: 100,
            seed: 42,
            conjunctions: false,
            weight: RankingWeight::default(),
            top_k: 10,
            filter: None,
            include_potential: false,
            out_dir: out_dir.into(),
            formats: Formats::default(),
            trees: 100,
            max_rows: None,
            scores: None,
        }
    }

    /// The explanation mode implied by task, threshold and epsilon.
    pub fn mode(&self) -> Result<ExplanationMode> {
        match (self.task, self.threshold, self.epsilon) {
            (Task::Classification, None, None) => Ok(ExplanationMode::Classification),
            (Task::Classification, _, _) => Err(Error::Config(
                "--threshold and --epsilon apply to regression only".into(),
            )),
            (Task::Regression, Some(_), Some(_)) => {
                Err(Error::Config("--threshold and --epsilon are mutually exclusive".into()))
            }
            (Task::Regression, Some(t), None) => ExplanationMode::regression_threshold(t),
            (Task::Regression, None, e) => ExplanationMode::regression_interval(e.unwrap_or(0.1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dataset.is_file() {
            return Err(Error::Config(format!("dataset not found: {}", self.dataset.display())));
        }
        if let Some(scores) = &self.scores {
            if !scores.is_file() {
                return Err(Error::Config(format!("score file not found: {}", scores.display())));
            }
        }
        if self.top_k == 0 {
            return Err(Error::Config("--top-k must be at least 1".into()));
        }
        if self.trees == 0 {
            return Err(Error::Config("--trees must be at least 1".into()));
        }
        if self.positive_from.is_some() && self.task != Task::Classification {
            return Err(Error::Config("--positive-from needs the classification task".into()));
        }
        self.mode().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_from_flags() {
        let mut c = RunConfig::new("x.csv", "out");
        assert_eq!(c.mode().unwrap(), ExplanationMode::Classification);
        c.threshold = Some(500.0);
        assert!(c.mode().unwrap_err().is_config());
        c.task = Task::Regression;
        assert_eq!(c.mode().unwrap(), ExplanationMode::RegressionThreshold { threshold: 500.0 });
        c.threshold = None;
        assert_eq!(c.mode().unwrap(), ExplanationMode::RegressionInterval { epsilon: 0.1 });
        c.epsilon = Some(2.0);
        assert!(c.mode().unwrap_err().is_config());
    }

    #[test]
    fn missing_dataset_names_path() {
        let c = RunConfig::new("/no/such/wine.csv", "out");
        let err = c.validate().unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("/no/such/wine.csv"));
    }

    #[test]
    fn format_list() {
        let f: Formats = "json,svg".parse().unwrap();
        assert!(f.json && f.svg && !f.csv);
        assert!("png".parse::<Formats>().is_err());
    }
}
