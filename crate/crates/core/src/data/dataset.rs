use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{FeatureVector, Task};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Names, kinds and category alphabets of the feature columns.
///
/// Categorical values are stored in the row matrix as the index of the
/// category in its (sorted) alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    pub categories: Vec<Vec<String>>,
}

impl Schema {
    pub fn numeric(names: Vec<String>) -> Self {
        let n = names.len();
        Self {
            names,
            kinds: vec![FeatureKind::Numeric; n],
            categories: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_categorical(&self, feature: usize) -> bool {
        self.kinds[feature] == FeatureKind::Categorical
    }

    /// Human-readable rendering of a stored value.
    pub fn format_value(&self, feature: usize, value: f64) -> String {
        match self.kinds[feature] {
            FeatureKind::Categorical => self.categories[feature]
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| format!("#{value}")),
            FeatureKind::Numeric => format_number(value),
        }
    }
}

/// Short, stable decimal rendering used in rule conditions.
pub fn format_number(value: f64) -> String {
    let s = format!("{value:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub target_name: String,
    /// Stable row ids (0-based data-row index in the source file).
    pub ids: Vec<u64>,
    pub task: Task,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Vec<f64>>, target: Vec<f64>, target_name: impl Into<String>, task: Task) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        let ds = Self {
            schema,
            rows,
            target,
            target_name: target_name.into(),
            ids,
            task,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let arity = self.schema.len();
        if self.schema.kinds.len() != arity || self.schema.categories.len() != arity {
            return Err(Error::Config("schema columns disagree".into()));
        }
        if self.target.len() != self.rows.len() || self.ids.len() != self.rows.len() {
            return Err(Error::Config(format!(
                "{} rows but {} targets",
                self.rows.len(),
                self.target.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: row.len(),
                });
            }
            for (f, &v) in row.iter().enumerate() {
                if self.schema.is_categorical(f) && (v.fract() != 0.0 || v < 0.0 || v as usize >= self.schema.categories[f].len()) {
                    return Err(Error::Config(format!("row {i}: category index {v} outside alphabet of `{}`", self.schema.names[f])));
                }
            }
        }
        if self.task == Task::Classification {
            if let Some((row, &value)) = self.target.iter().enumerate().find(|(_, &y)| y != 0.0 && y != 1.0) {
                return Err(Error::NonBinaryTarget { row, value });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn instance(&self, row: usize) -> FeatureVector {
        FeatureVector::new(Some(self.ids[row]), self.rows[row].clone())
    }

    pub fn instances(&self) -> impl Iterator<Item = FeatureVector> + '_ {
        (0..self.len()).map(|i| self.instance(i))
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[feature]).collect()
    }

    /// Binary labels, for classification datasets.
    pub fn labels(&self) -> Vec<u8> {
        self.target.iter().map(|&y| u8::from(y >= 0.5)).collect()
    }

    /// Rows at `indices`, in that order, keeping their ids.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            target_name: self.target_name.clone(),
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
            task: self.task,
        }
    }

    /// A uniformly random subset of `n` rows (all rows when `n >= len`),
    /// kept in original order.
    pub fn subsample(&self, n: usize, seed: u64) -> Dataset {
        if n >= self.len() {
            return self.clone();
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(n);
        idx.sort_unstable();
        self.subset(&idx)
    }

    /// Turns a numeric target into classes: `1` when `target >= threshold`.
    pub fn binarize(mut self, threshold: f64) -> Dataset {
        for y in &mut self.target {
            *y = f64::from(*y >= threshold);
        }
        self.task = Task::Classification;
        self
    }

    pub fn row_of_id(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }
}

/// Loads a comma-separated file with a header row. Columns whose every value
/// parses as a number are numeric; any other column is categorical.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, task: Task) -> Result<Dataset> {
    let path = path.as_ref();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{}: {e}", path.display()),
            )),
            _ => parse_err(0, e.to_string()),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTargetColumn(target_column.to_string()))?;

    let mut raw: Vec<(u64, Vec<String>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        if let Some(col) = record.iter().position(str::is_empty) {
            return Err(parse_err(line, format!("missing value in column `{}`", headers[col])));
        }
        raw.push((line, record.iter().map(str::to_string).collect()));
    }

    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != target_idx).collect();
    let mut schema = Schema {
        names: feature_cols.iter().map(|&c| headers[c].clone()).collect(),
        kinds: Vec::with_capacity(feature_cols.len()),
        categories: Vec::with_capacity(feature_cols.len()),
    };
    for &c in &feature_cols {
        let numeric = raw.iter().all(|(_, r)| r[c].parse::<f64>().is_ok_and(f64::is_finite));
        if numeric {
            schema.kinds.push(FeatureKind::Numeric);
            schema.categories.push(Vec::new());
        } else {
            let alphabet: BTreeSet<&str> = raw.iter().map(|(_, r)| r[c].as_str()).collect();
            schema.kinds.push(FeatureKind::Categorical);
            schema.categories.push(alphabet.into_iter().map(str::to_string).collect());
        }
    }

    let mut rows = Vec::with_capacity(raw.len());
    let mut target = Vec::with_capacity(raw.len());
    for (line, record) in &raw {
        let mut row = Vec::with_capacity(feature_cols.len());
        for (f, &c) in feature_cols.iter().enumerate() {
            let v = match schema.kinds[f] {
                FeatureKind::Numeric => record[c].parse::<f64>().expect("checked numeric"),
                FeatureKind::Categorical => schema.categories[f]
                    .binary_search(&record[c])
                    .expect("value is in its alphabet") as f64,
            };
            row.push(v);
        }
        let y: f64 = record[target_idx]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(*line, format!("unparseable target `{}`", record[target_idx])))?;
        if task == Task::Classification && y != 0.0 && y != 1.0 {
            return Err(parse_err(*line, format!("classification target must be 0 or 1, found {y}")));
        }
        rows.push(row);
        target.push(y);
    }
    Dataset::new(schema, rows, target, target_column, task)
}

/// Writes the dataset as CSV (features then target) so that [`load_csv`]
/// reads it back unchanged.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| Error::Io(e.into()))?;
    let mut header = dataset.schema.names.clone();
    header.push(dataset.target_name.clone());
    w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
    for (row, y) in dataset.rows.iter().zip(&dataset.target) {
        let mut rec: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(f, &v)| match dataset.schema.kinds[f] {
                FeatureKind::Numeric => format!("{v:?}"),
                FeatureKind::Categorical => dataset.schema.categories[f][v as usize].clone(),
            })
            .collect();
        rec.push(format!("{y:?}"));
        w.write_record(&rec).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
