use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::isotonic::{push_block, Block};
use crate::{Error, Result};

/// How a single estimate is derived from a probability interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    Mean,
    Regularised,
}

/// A calibrated probability for the positive class with its Venn-Abers
/// bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityInterval {
    pub low: f64,
    pub high: f64,
    pub estimate: f64,
    pub mode: EstimateMode,
}

impl ProbabilityInterval {
    pub fn from_bounds(low: f64, high: f64, mode: EstimateMode) -> Result<Self> {
        let estimate = match mode {
            EstimateMode::Mean => {
                check_bounds(low, high)?;
                (low + high) / 2.0
            }
            EstimateMode::Regularised => regularise(low, high)?,
        };
        Ok(Self {
            low,
            high,
            estimate,
            mode,
        })
    }

    /// Epistemic uncertainty, the interval width.
    pub fn uncertainty(&self) -> f64 {
        self.high - self.low
    }
}

fn check_bounds(low: f64, high: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
        return Err(Error::InvalidInterval { low, high });
    }
    Ok(())
}

/// Log-loss optimal single probability from a `[low, high]` interval:
/// `high / (1 - low + high)`.
pub fn regularise(low: f64, high: f64) -> Result<f64> {
    check_bounds(low, high)?;
    let p = high / (1.0 - low + high);
    // guard the last ulp so that low <= p <= high always holds
    Ok(p.clamp(low, high))
}

/// Labelled calibration material for one of the two calibrator families.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationData {
    Classification { scores: Vec<f64>, labels: Vec<u8> },
    Regression { residuals: Vec<f64> },
}

impl CalibrationData {
    pub fn classification(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some((row, &l)) = labels.iter().enumerate().find(|(_, &l)| l > 1) {
            return Err(Error::NonBinaryTarget {
                row,
                value: l as f64,
            });
        }
        Ok(Self::Classification { scores, labels })
    }

    pub fn regression(residuals: Vec<f64>) -> Self {
        Self::Regression { residuals }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Classification { scores, .. } => scores.len(),
            Self::Regression { residuals } => residuals.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Naive Venn-Abers prediction: refits both augmented isotonic calibrators
/// for the single `test_score`.
pub fn va_predict(cal: &CalibrationData, test_score: f64) -> Result<ProbabilityInterval> {
    match cal {
        CalibrationData::Classification { scores, labels } => {
            VennAbers::new(scores, labels)?.predict(test_score)
        }
        CalibrationData::Regression { .. } => Err(Error::ModeMismatch(
            "Venn-Abers needs classification calibration data".into(),
        )),
    }
}

/// Inductive Venn-Abers calibrator over a fixed calibration set.
///
/// Calibration points are sorted once; each query inserts the test point
/// after every calibration point with an equal score and runs one PAV pass
/// per hypothetical label, so a query is `O(q)`.
#[derive(Debug, Clone)]
pub struct VennAbers {
    scores: Vec<f64>,
    labels: Vec<f64>,
}

impl VennAbers {
    pub fn new(scores: &[f64], labels: &[u8]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::NoCalibrationPoints);
        }
        if scores.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        let mut points = Vec::with_capacity(scores.len());
        for (row, (&s, &l)) in scores.iter().zip(labels).enumerate() {
            if !s.is_finite() {
                return Err(Error::NonFinite(s));
            }
            if l > 1 {
                return Err(Error::NonBinaryTarget {
                    row,
                    value: l as f64,
                });
            }
            points.push((s, l as f64));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        Ok(Self {
            scores: points.iter().map(|p| p.0).collect(),
            labels: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn predict(&self, test_score: f64) -> Result<ProbabilityInterval> {
        if !test_score.is_finite() {
            return Err(Error::NonFinite(test_score));
        }
        let pos = self.scores.partition_point(|&s| s <= test_score);
        let low = self.augmented_fit(pos, 0.0);
        let high = self.augmented_fit(pos, 1.0);
        // g0 <= g1 pointwise; clamp rounding noise only
        let high = high.max(low);
        ProbabilityInterval::from_bounds(low, high, EstimateMode::Regularised)
    }

    /// Value of the isotonic fit at the inserted test point.
    fn augmented_fit(&self, pos: usize, label: f64) -> f64 {
        let mut blocks: Vec<Block> = Vec::with_capacity(self.labels.len() + 1);
        let sequence = self.labels[..pos]
            .iter()
            .chain(std::iter::once(&label))
            .chain(&self.labels[pos..]);
        for &y in sequence {
            push_block(&mut blocks, Block { sum: y, len: 1 });
        }
        let mut covered = 0usize;
        for b in &blocks {
            covered += b.len;
            if covered > pos {
                return b.mean();
            }
        }
        unreachable!("test point lies inside the fitted sequence")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::fit_isotonic;
    use proptest::prelude::*;

    fn fixture() -> CalibrationData {
        CalibrationData::classification(vec![0.1, 0.3, 0.5, 0.7, 0.9], vec![0, 1, 0, 1, 1]).unwrap()
    }

    #[test]
    fn hand_worked_interval() {
        let p = va_predict(&fixture(), 0.6).unwrap();
        assert!((p.low - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.high - 1.0).abs() < 1e-12);
        assert!((p.estimate - 0.6).abs() < 1e-12);
        assert_eq!(p.mode, EstimateMode::Regularised);
    }

    #[test]
    fn regularise_examples() {
        assert!((regularise(0.2, 0.8).unwrap() - 0.5).abs() < 1e-15);
        assert!((regularise(0.6, 0.9).unwrap() - 0.9 / 1.3).abs() < 1e-15);
        assert_eq!(regularise(0.37, 0.37).unwrap(), 0.37);
        assert_eq!(regularise(0.0, 1.0).unwrap(), 0.5);
        assert!(matches!(regularise(0.8, 0.2), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn maximal_uncertainty_is_symmetric() {
        let p = ProbabilityInterval::from_bounds(0.0, 1.0, EstimateMode::Regularised).unwrap();
        assert_eq!(p.estimate, 0.5);
        assert_eq!(p.uncertainty(), 1.0);
    }

    #[test]
    fn empty_calibration_is_rejected() {
        let cal = CalibrationData::classification(vec![], vec![]).unwrap();
        assert!(matches!(va_predict(&cal, 0.5), Err(Error::NoCalibrationPoints)));
    }

    #[test]
    fn regression_data_is_a_mismatch() {
        let cal = CalibrationData::regression(vec![0.0]);
        assert!(matches!(va_predict(&cal, 0.5), Err(Error::ModeMismatch(_))));
    }

    /// Independent route: append the test point and refit with the generic
    /// isotonic fitter, then read the step function at the test score.
    fn naive(scores: &[f64], labels: &[u8], s: f64) -> (f64, f64) {
        let mut pts: Vec<(f64, f64)> = scores.iter().zip(labels).map(|(&a, &b)| (a, b as f64)).collect();
        pts.push((s, 0.0));
        let g0 = fit_isotonic(&pts).unwrap().evaluate(s);
        pts.pop();
        pts.push((s, 1.0));
        let g1 = fit_isotonic(&pts).unwrap().evaluate(s);
        (g0, g1)
    }

    proptest! {
        #[test]
        fn fast_path_matches_refit(
            cal in prop::collection::vec((0u8..=10, 0u8..=1), 1..40),
            s in 0u8..=10,
        ) {
            let scores: Vec<f64> = cal.iter().map(|c| c.0 as f64 / 10.0).collect();
            let labels: Vec<u8> = cal.iter().map(|c| c.1).collect();
            let s = s as f64 / 10.0;
            let p = VennAbers::new(&scores, &labels).unwrap().predict(s).unwrap();
            let (g0, g1) = naive(&scores, &labels, s);
            prop_assert!((p.low - g0).abs() < 1e-12);
            prop_assert!((p.high - g1).abs() < 1e-12);
        }

        #[test]
        fn interval_is_sane(
            cal in prop::collection::vec((0.0f64..1.0, 0u8..=1), 1..80),
            s in 0.0f64..1.0,
        ) {
            let scores: Vec<f64> = cal.iter().map(|c| c.0).collect();
            let labels: Vec<u8> = cal.iter().map(|c| c.1).collect();
            let p = VennAbers::new(&scores, &labels).unwrap().predict(s).unwrap();
            prop_assert!(0.0 <= p.low && p.low <= p.high && p.high <= 1.0);
            prop_assert!(p.low <= p.estimate && p.estimate <= p.high);
        }

        #[test]
        fn regularised_lies_between_bounds(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (low, high) = if a <= b { (a, b) } else { (b, a) };
            let p = regularise(low, high).unwrap();
            prop_assert!(low <= p && p <= high);
        }
    }
}
