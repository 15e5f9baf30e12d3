use serde::{Deserialize, Serialize};

use super::ExplanationMode;
use crate::calibration::{regularise, ConformalRegressor, TiePolicy, VennAbers};
use crate::data::Dataset;
use crate::model::{FeatureVector, ScoringModel, Task};
use crate::{Error, Result};

/// A calibrated estimate with its uncertainty interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl Prediction {
    pub fn uncertainty(&self) -> f64 {
        self.high - self.low
    }
}

/// Maps raw model output to a calibrated [`Prediction`].
#[derive(Debug, Clone)]
pub enum Calibrator {
    VennAbers(VennAbers),
    Conformal(ConformalRegressor),
    /// Predictive distribution evaluated at `threshold`, recalibrated with
    /// Venn-Abers on the event `y < threshold`.
    Thresholded {
        regressor: ConformalRegressor,
        venn_abers: VennAbers,
        threshold: f64,
    },
}

impl Calibrator {
    /// Fits the calibrator that `mode` needs on the calibration set.
    pub fn fit(model: &ScoringModel, calibration: &Dataset, mode: ExplanationMode, tie_policy: TiePolicy) -> Result<Self> {
        if calibration.is_empty() {
            return Err(Error::NoCalibrationPoints);
        }
        let expected = match mode {
            ExplanationMode::Classification => Task::Classification,
            _ => Task::Regression,
        };
        if model.task() != expected || calibration.task != expected {
            return Err(Error::ModeMismatch(format!(
                "{mode:?} needs a {expected:?} model and dataset"
            )));
        }
        let scores = calibration
            .instances()
            .map(|x| model.score(&x))
            .collect::<Result<Vec<f64>>>()?;
        match mode {
            ExplanationMode::Classification => {
                Ok(Calibrator::VennAbers(VennAbers::new(&scores, &calibration.labels())?))
            }
            ExplanationMode::RegressionInterval { .. } => Ok(Calibrator::Conformal(
                ConformalRegressor::from_predictions(&calibration.target, &scores, tie_policy)?,
            )),
            ExplanationMode::RegressionThreshold { threshold } => {
                let regressor = ConformalRegressor::from_predictions(&calibration.target, &scores, tie_policy)?;
                let sorted = regressor.residuals();
                let mut va_scores = Vec::with_capacity(scores.len());
                for (&h, &y) in scores.iter().zip(&calibration.target) {
                    let r = y - h;
                    let own = sorted.partition_point(|&x| x < r);
                    let p = match regressor.cpd_leave_one_out(own, h) {
                        Some(cpd) => cpd.threshold_probability(threshold),
                        None => regressor.cpd(h).threshold_probability(threshold),
                    };
                    va_scores.push(p);
                }
                let labels: Vec<u8> = calibration.target.iter().map(|&y| u8::from(y < threshold)).collect();
                Ok(Calibrator::Thresholded {
                    venn_abers: VennAbers::new(&va_scores, &labels)?,
                    regressor,
                    threshold,
                })
            }
        }
    }

    pub fn matches(&self, mode: ExplanationMode) -> bool {
        match (self, mode) {
            (Calibrator::VennAbers(_), ExplanationMode::Classification) => true,
            (Calibrator::Conformal(_), ExplanationMode::RegressionInterval { .. }) => true,
            (Calibrator::Thresholded { threshold, .. }, ExplanationMode::RegressionThreshold { threshold: t }) => {
                *threshold == t
            }
            _ => false,
        }
    }

    /// Calibrates one raw model output.
    pub fn calibrate(&self, score: f64, mode: ExplanationMode) -> Result<Prediction> {
        if !self.matches(mode) {
            return Err(Error::ModeMismatch(format!("calibrator does not serve {mode:?}")));
        }
        match (self, mode) {
            (Calibrator::VennAbers(va), _) => {
                let p = va.predict(score)?;
                Ok(Prediction {
                    estimate: p.estimate,
                    low: p.low,
                    high: p.high,
                })
            }
            (Calibrator::Conformal(cr), ExplanationMode::RegressionInterval { epsilon }) => {
                let cpd = cr.cpd(score);
                let (low, high) = cpd.interval_two_sided(epsilon)?;
                let estimate = cpd.median().clamp(low, high);
                Ok(Prediction { estimate, low, high })
            }
            (
                Calibrator::Thresholded {
                    regressor,
                    venn_abers,
                    threshold,
                },
                _,
            ) => {
                let percentile = regressor.cpd(score).threshold_probability(*threshold);
                let p = venn_abers.predict(percentile)?;
                Ok(Prediction {
                    estimate: p.estimate,
                    low: p.low,
                    high: p.high,
                })
            }
            _ => unreachable!("checked by matches"),
        }
    }

    /// Combines calibrated predictions of several perturbed copies using
    /// the given weights. Probability bounds are averaged and the estimate
    /// is the regularised value of the averaged bounds; regression
    /// estimates and bounds are averaged directly.
    pub fn aggregate(&self, parts: &[(Prediction, f64)]) -> Prediction {
        let total: f64 = parts.iter().map(|p| p.1).sum();
        let avg = |f: fn(&Prediction) -> f64| parts.iter().map(|(p, w)| f(p) * w).sum::<f64>() / total;
        let low = avg(|p| p.low);
        let high = avg(|p| p.high).max(low);
        match self {
            Calibrator::Conformal(_) => Prediction {
                estimate: avg(|p| p.estimate).clamp(low, high),
                low,
                high,
            },
            _ => {
                let low = low.clamp(0.0, 1.0);
                let high = high.clamp(low, 1.0);
                Prediction {
                    estimate: regularise(low, high).expect("bounds clamped into [0, 1]"),
                    low,
                    high,
                }
            }
        }
    }
}

/// Scores `instance` with `model` and calibrates the result.
pub fn calibrated_predict(
    model: &ScoringModel,
    calibrator: &Calibrator,
    instance: &FeatureVector,
    mode: ExplanationMode,
) -> Result<Prediction> {
    if !calibrator.matches(mode) {
        return Err(Error::ModeMismatch(format!("calibrator does not serve {mode:?}")));
    }
    calibrator.calibrate(model.score(instance)?, mode)
}
