//! Probability and distribution calibrators.
//!
//! [`VennAbers`] turns classifier scores into a `[low, high]` probability
//! interval; [`ConformalRegressor`] turns signed calibration residuals into a
//! [`ConformalPredictiveDistribution`] that answers interval, median and
//! threshold queries. Both are immutable once built and safe to share
//! between threads.

mod cps;
mod isotonic;
mod venn_abers;

pub use cps::{build_cpd, ConformalPredictiveDistribution, ConformalRegressor, OneSided, TiePolicy};
pub use isotonic::{fit_isotonic, pool_adjacent_violators, IsotonicFit};
pub use venn_abers::{
    regularise, va_predict, CalibrationData, EstimateMode, ProbabilityInterval, VennAbers,
};
