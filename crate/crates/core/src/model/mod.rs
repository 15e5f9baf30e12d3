//! Underlying scoring models.
//!
//! The explainer only needs `h(x)`: a positive-class score in `[0, 1]` for
//! classification or a point prediction for regression. [`ScoringModel`]
//! provides either a built-in [`RandomForest`] or a table of externally
//! computed scores keyed by instance id.

mod forest;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use forest::{DecisionTree, ForestParams, Node, RandomForest};

use crate::data::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

/// Feature values of one object, with the dataset row id when it has one.
/// Perturbed copies carry no id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: Option<u64>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(id: Option<u64>, values: Vec<f64>) -> Self {
        Self { id, values }
    }

    pub fn anonymous(values: Vec<f64>) -> Self {
        Self { id: None, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scores supplied from outside, one per known instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScores {
    scores: BTreeMap<u64, f64>,
    task: Task,
}

impl ExternalScores {
    pub fn new(scores: BTreeMap<u64, f64>, task: Task) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::NoScores);
        }
        if task == Task::Classification {
            if let Some((_, &bad)) = scores.iter().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
                return Err(Error::InvalidLabel(bad));
            }
        }
        Ok(Self { scores, task })
    }

    pub fn get(&self, id: u64) -> Option<f64> {
        self.scores.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoringModel {
    Forest(RandomForest),
    External(ExternalScores),
}

impl ScoringModel {
    pub fn task(&self) -> Task {
        match self {
            ScoringModel::Forest(f) => f.task(),
            ScoringModel::External(e) => e.task,
        }
    }

    /// Whether arbitrary (perturbed) feature vectors can be scored.
    pub fn supports_rescoring(&self) -> bool {
        matches!(self, ScoringModel::Forest(_))
    }

    pub fn score(&self, instance: &FeatureVector) -> Result<f64> {
        match self {
            ScoringModel::Forest(_) => self.score_values(&instance.values),
            ScoringModel::External(table) => instance
                .id
                .and_then(|id| table.get(id))
                .ok_or(Error::MissingScore(instance.id)),
        }
    }

    /// Scores raw feature values; only the forest can do this.
    pub fn score_values(&self, values: &[f64]) -> Result<f64> {
        match self {
            ScoringModel::Forest(forest) => {
                if values.len() != forest.n_features() {
                    return Err(Error::ArityMismatch {
                        expected: forest.n_features(),
                        got: values.len(),
                    });
                }
                Ok(forest.predict(values))
            }
            ScoringModel::External(_) => Err(Error::AlternativesRequireRescoring),
        }
    }
}

/// Trains the built-in forest on the proper training set.
pub fn train_forest(training: &Dataset, params: &ForestParams, task: Task) -> Result<ScoringModel> {
    if training.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if task == Task::Classification {
        if let Some((row, &value)) = training
            .target
            .iter()
            .enumerate()
            .find(|(_, &y)| y != 0.0 && y != 1.0)
        {
            return Err(Error::NonBinaryTarget { row, value });
        }
    }
    Ok(ScoringModel::Forest(RandomForest::fit(
        &training.rows,
        &training.target,
        task,
        params,
    )))
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    id: u64,
    score: f64,
}

/// Reads an `id,score` CSV into an external-scores model.
pub fn load_external_scores(path: impl AsRef<Path>, task: Task) -> Result<ScoringModel> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| {
        Error::Parse {
            path: path.to_owned(),
            line: 0,
            message: e.to_string(),
        }
    })?;
    let headers = reader.headers().map_err(|e| parse_error(path, 1, e))?.clone();
    if headers.is_empty() {
        return Err(Error::NoScores);
    }
    if headers.iter().collect::<Vec<_>>() != ["id", "score"] {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 1,
            message: format!("expected header `id,score`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut scores = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: ScoreRow = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_error(path, line, e))?;
        if !row.score.is_finite() || (task == Task::Classification && !(0.0..=1.0).contains(&row.score)) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line,
                message: format!("score {} out of range", row.score),
            });
        }
        scores.insert(row.id, row.score);
    }
    Ok(ScoringModel::External(ExternalScores::new(scores, task)?))
}

fn parse_error(path: &Path, line: u64, e: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn external_lookup() {
        let f = write_tmp("id,score\n0,0.9\n1,0.1\n");
        let model = load_external_scores(f.path(), Task::Classification).unwrap();
        assert_eq!(model.score(&FeatureVector::new(Some(0), vec![])).unwrap(), 0.9);
        assert_eq!(model.score(&FeatureVector::new(Some(1), vec![])).unwrap(), 0.1);
        assert!(!model.supports_rescoring());
    }

    #[test]
    fn external_miss() {
        let mut table = BTreeMap::new();
        table.insert(7, 0.42);
        let model = ScoringModel::External(ExternalScores::new(table, Task::Classification).unwrap());
        assert_eq!(model.score(&FeatureVector::new(Some(7), vec![1.0])).unwrap(), 0.42);
        let err = model.score(&FeatureVector::new(Some(8), vec![1.0])).unwrap_err();
        assert!(err.to_string().starts_with("no score for instance"));
    }

    #[test]
    fn out_of_range_score_names_its_line() {
        let f = write_tmp("id,score\n0,0.5\n1,1.3\n");
        match load_external_scores(f.path(), Task::Classification).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        // regression scores are unbounded
        assert!(load_external_scores(f.path(), Task::Regression).is_ok());
    }

    #[test]
    fn malformed_row_names_its_line() {
        let f = write_tmp("id,score\n0,0.5\nx,0.2\n");
        match load_external_scores(f.path(), Task::Classification).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_score_file() {
        let f = write_tmp("id,score\n");
        assert_eq!(
            load_external_scores(f.path(), Task::Classification).unwrap_err().to_string(),
            "no scores"
        );
        let f = write_tmp("");
        assert!(matches!(
            load_external_scores(f.path(), Task::Classification),
            Err(Error::NoScores)
        ));
    }

    #[test]
    fn forest_checks_arity() {
        let forest = RandomForest::fit(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 1.0], Task::Classification, &ForestParams::default());
        let model = ScoringModel::Forest(forest);
        assert!(matches!(
            model.score(&FeatureVector::anonymous(vec![1.0])),
            Err(Error::ArityMismatch { expected: 2, got: 1 })
        ));
    }
}
