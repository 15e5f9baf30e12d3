//! Tabular datasets: CSV ingestion, seeded train/calibration/test splits and
//! synthetic generators with a known ground truth.

mod dataset;
mod split;
mod synth;

pub use dataset::{format_number, load_csv, write_csv, Dataset, FeatureKind, Schema};
pub use split::{split, DataSplit};
pub use synth::{synth_classification, synth_regression, SyntheticData};
