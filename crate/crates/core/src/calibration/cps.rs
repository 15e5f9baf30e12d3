//! Split conformal predictive systems over signed residuals.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the tie-breaking variable `τ` of the predictive distribution is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// `τ = 0.5`; every query is deterministic.
    #[default]
    Half,
    /// `τ ~ U(0, 1)`, drawn once per distribution from the given seed.
    Seeded(u64),
}

impl TiePolicy {
    fn tau(self) -> f64 {
        match self {
            TiePolicy::Half => 0.5,
            TiePolicy::Seeded(seed) => ChaCha8Rng::seed_from_u64(seed).random::<f64>(),
        }
    }
}

/// Which end of a one-sided interval is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneSided {
    /// `[C, +inf)`
    LowerBounded,
    /// `(-inf, C]`
    UpperBounded,
}

/// A conformal predictive distribution for one test object.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalPredictiveDistribution {
    c_values: Vec<f64>,
    point_prediction: f64,
    tau: f64,
    tie_policy: TiePolicy,
}

/// Builds the distribution `C_(i) = point_prediction + α_(i)`.
pub fn build_cpd(
    residuals: &[f64],
    point_prediction: f64,
    tie_policy: TiePolicy,
) -> Result<ConformalPredictiveDistribution> {
    if residuals.is_empty() {
        return Err(Error::EmptyResiduals);
    }
    let mut sorted = residuals.to_vec();
    sort_floats(&mut sorted)?;
    Ok(ConformalPredictiveDistribution::from_sorted(
        &sorted,
        point_prediction,
        tie_policy,
    ))
}

fn sort_floats(values: &mut [f64]) -> Result<()> {
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(())
}

impl ConformalPredictiveDistribution {
    fn from_sorted(sorted_residuals: &[f64], point_prediction: f64, tie_policy: TiePolicy) -> Self {
        Self {
            c_values: sorted_residuals.iter().map(|a| point_prediction + a).collect(),
            point_prediction,
            tau: tie_policy.tau(),
            tie_policy,
        }
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c_values
    }

    pub fn point_prediction(&self) -> f64 {
        self.point_prediction
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn q(&self) -> usize {
        self.c_values.len()
    }

    /// 1-based order statistic.
    fn c(&self, i: usize) -> f64 {
        self.c_values[i - 1]
    }

    /// Evaluates the predictive distribution at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        let q1 = (self.q() + 1) as f64;
        let below = self.c_values.partition_point(|&c| c < y);
        let at_or_below = self.c_values.partition_point(|&c| c <= y);
        if at_or_below > below {
            // y = C_(i') = ... = C_(i'')
            let first = below + 1;
            let last = at_or_below;
            (first as f64 - 1.0 + (last - first + 2) as f64 * self.tau) / q1
        } else {
            (below as f64 + self.tau) / q1
        }
    }

    /// Estimated probability that the target is at most `t`.
    pub fn threshold_probability(&self, t: f64) -> f64 {
        self.cdf(t)
    }

    /// Symmetric interval with expected error rate `epsilon`.
    pub fn interval_two_sided(&self, epsilon: f64) -> Result<(f64, f64)> {
        check_epsilon(epsilon)?;
        let q1 = (self.q() + 1) as f64;
        let lo = floor_index(epsilon / 2.0 * q1);
        let hi = ceil_index((1.0 - epsilon / 2.0) * q1);
        let (lo, hi) = (self.checked(lo, epsilon)?, self.checked(hi, epsilon)?);
        Ok((self.c(lo), self.c(hi)))
    }

    pub fn interval_one_sided(&self, epsilon: f64, side: OneSided) -> Result<(f64, f64)> {
        check_epsilon(epsilon)?;
        let q1 = (self.q() + 1) as f64;
        match side {
            OneSided::LowerBounded => {
                let i = self.checked(floor_index(epsilon * q1), epsilon)?;
                Ok((self.c(i), f64::INFINITY))
            }
            OneSided::UpperBounded => {
                let i = self.checked(ceil_index((1.0 - epsilon) * q1), epsilon)?;
                Ok((f64::NEG_INFINITY, self.c(i)))
            }
        }
    }

    pub fn median(&self) -> f64 {
        let half = 0.5 * (self.q() + 1) as f64;
        (self.c(half.ceil() as usize) + self.c(half.floor() as usize)) / 2.0
    }

    fn checked(&self, index: i64, epsilon: f64) -> Result<usize> {
        if index < 1 || index as usize > self.q() {
            return Err(Error::InsufficientCalibration {
                epsilon,
                q: self.q(),
            });
        }
        Ok(index as usize)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

// products like 0.05 * 501 may land an ulp off an integer
const INDEX_SLACK: f64 = 1e-9;

fn floor_index(x: f64) -> i64 {
    (x + INDEX_SLACK).floor() as i64
}

fn ceil_index(x: f64) -> i64 {
    (x - INDEX_SLACK).ceil() as i64
}

/// Calibrated residuals `y_i - h(x_i)` kept sorted, ready to shift onto any
/// point prediction.
#[derive(Debug, Clone)]
pub struct ConformalRegressor {
    residuals: Vec<f64>,
    tie_policy: TiePolicy,
}

impl ConformalRegressor {
    pub fn new(residuals: &[f64], tie_policy: TiePolicy) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::EmptyResiduals);
        }
        let mut residuals = residuals.to_vec();
        sort_floats(&mut residuals)?;
        Ok(Self {
            residuals,
            tie_policy,
        })
    }

    pub fn from_predictions(targets: &[f64], predictions: &[f64], tie_policy: TiePolicy) -> Result<Self> {
        let residuals: Vec<f64> = targets.iter().zip(predictions).map(|(y, h)| y - h).collect();
        Self::new(&residuals, tie_policy)
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn cpd(&self, point_prediction: f64) -> ConformalPredictiveDistribution {
        ConformalPredictiveDistribution::from_sorted(&self.residuals, point_prediction, self.tie_policy)
    }

    /// The distribution for calibration object `index` built from every
    /// other residual. Used to score calibration objects without letting
    /// them see their own residual.
    pub fn cpd_leave_one_out(&self, index: usize, point_prediction: f64) -> Option<ConformalPredictiveDistribution> {
        if self.residuals.len() < 2 {
            return None;
        }
        let mut rest = self.residuals.clone();
        rest.remove(index);
        Some(ConformalPredictiveDistribution::from_sorted(
            &rest,
            point_prediction,
            self.tie_policy,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> ConformalPredictiveDistribution {
        build_cpd(&[-1.0, 0.0, 1.0], 10.0, TiePolicy::Half).unwrap()
    }

    #[test]
    fn shifts_sorted_residuals() {
        let cpd = build_cpd(&[1.0, -1.0, 0.0], 10.0, TiePolicy::Half).unwrap();
        assert_eq!(cpd.c_values(), &[9.0, 10.0, 11.0]);
    }

    #[test]
    fn open_interval_branch() {
        assert_eq!(fixture().cdf(9.5), 0.375);
    }

    #[test]
    fn tie_branch() {
        assert_eq!(fixture().cdf(10.0), 0.5);
    }

    #[test]
    fn tie_branch_with_repeated_values() {
        // C = {1, 2, 2, 3}; y = 2 gives i' = 2, i'' = 3
        let cpd = build_cpd(&[1.0, 2.0, 2.0, 3.0], 0.0, TiePolicy::Half).unwrap();
        assert_eq!(cpd.cdf(2.0), (2.0 - 1.0 + 3.0 * 0.5) / 5.0);
    }

    #[test]
    fn threshold_probability_tails() {
        let cpd = fixture();
        assert_eq!(cpd.threshold_probability(20.0), 0.875);
        assert_eq!(cpd.threshold_probability(-20.0), 0.125);
    }

    #[test]
    fn two_sided_interval() {
        assert_eq!(fixture().interval_two_sided(0.5).unwrap(), (9.0, 11.0));
        assert!(matches!(
            fixture().interval_two_sided(0.05),
            Err(Error::InsufficientCalibration { .. })
        ));
    }

    #[test]
    fn one_sided_intervals() {
        let cpd = fixture();
        assert_eq!(
            cpd.interval_one_sided(0.25, OneSided::LowerBounded).unwrap(),
            (9.0, f64::INFINITY)
        );
        assert_eq!(
            cpd.interval_one_sided(0.25, OneSided::UpperBounded).unwrap(),
            (f64::NEG_INFINITY, 11.0)
        );
        assert!(cpd.interval_one_sided(0.01, OneSided::LowerBounded).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(fixture().median(), 10.0);
        let cpd = build_cpd(&[5.0, 7.0], 0.0, TiePolicy::Half).unwrap();
        assert_eq!(cpd.median(), 6.0);
        let symmetric = build_cpd(&[-2.0, -0.5, 0.5, 2.0], 3.25, TiePolicy::Half).unwrap();
        assert_eq!(symmetric.median(), 3.25);
    }

    #[test]
    fn empty_residuals_are_rejected() {
        assert!(matches!(build_cpd(&[], 0.0, TiePolicy::Half), Err(Error::EmptyResiduals)));
    }

    #[test]
    fn index_arithmetic_survives_rounding() {
        // 0.05 * 501 = 25.05; 0.95 * 501 = 475.95
        let residuals: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let cpd = build_cpd(&residuals, 0.0, TiePolicy::Half).unwrap();
        assert_eq!(cpd.interval_two_sided(0.1).unwrap(), (24.0, 475.0));
        // 0.25 * 4 must be exactly index 1
        let cpd = fixture();
        assert_eq!(cpd.interval_one_sided(0.25, OneSided::LowerBounded).unwrap().0, 9.0);
    }

    #[test]
    fn seeded_tau_is_reproducible_and_in_range() {
        let a = build_cpd(&[0.0], 0.0, TiePolicy::Seeded(7)).unwrap();
        let b = build_cpd(&[0.0], 0.0, TiePolicy::Seeded(7)).unwrap();
        assert_eq!(a.tau(), b.tau());
        assert!((0.0..1.0).contains(&a.tau()));
    }

    #[test]
    fn leave_one_out_drops_own_residual() {
        let reg = ConformalRegressor::new(&[-1.0, 0.0, 1.0], TiePolicy::Half).unwrap();
        let cpd = reg.cpd_leave_one_out(1, 10.0).unwrap();
        assert_eq!(cpd.c_values(), &[9.0, 11.0]);
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_bounded(
            residuals in prop::collection::vec(-5i32..5, 1..30),
            grid_start in -10.0f64..0.0,
            seed in any::<u64>(),
        ) {
            let residuals: Vec<f64> = residuals.into_iter().map(f64::from).collect();
            for policy in [TiePolicy::Half, TiePolicy::Seeded(seed)] {
                let cpd = build_cpd(&residuals, 0.0, policy).unwrap();
                let mut prev = 0.0;
                for k in 0..200 {
                    let y = grid_start + k as f64 * 0.1;
                    let v = cpd.cdf(y);
                    prop_assert!((0.0..=1.0).contains(&v));
                    prop_assert!(v >= prev - 1e-15, "not monotone at {y}");
                    prev = v;
                }
                prop_assert!(cpd.cdf(-1e12) < 1.0 / residuals.len() as f64 + 1e-12);
                prop_assert!(cpd.cdf(1e12) > 1.0 - 1.0 / residuals.len() as f64 - 1e-12);
            }
        }

        #[test]
        fn two_sided_interval_is_ordered(residuals in prop::collection::vec(-100.0f64..100.0, 40..80), eps in 0.1f64..0.9) {
            let cpd = build_cpd(&residuals, 0.0, TiePolicy::Half).unwrap();
            let (lo, hi) = cpd.interval_two_sided(eps).unwrap();
            prop_assert!(lo <= hi);
            let m = cpd.median();
            prop_assert!(lo <= m && m <= hi);
        }
    }
}
