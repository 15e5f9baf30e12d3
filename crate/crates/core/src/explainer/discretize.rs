use super::Predicate;

/// Deduplicated 10%..90% quantiles (linear interpolation) of `values`,
/// keeping only boundaries above the minimum.
pub fn decile_boundaries(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let last = (sorted.len() - 1) as f64;
    let mut out: Vec<f64> = Vec::with_capacity(9);
    for k in 1..10 {
        let pos = last * k as f64 / 10.0;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        let q = sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
        if q > min && out.last().is_none_or(|&b| q > b) {
            out.push(q);
        }
    }
    out
}

/// At most two conditions that move `instance_value` out of its decile bin:
/// below the largest boundary under it and at or above the smallest
/// boundary over it.
pub fn discretize_feature(cal_values: &[f64], instance_value: f64) -> Vec<Predicate> {
    let boundaries = decile_boundaries(cal_values);
    let mut out = Vec::with_capacity(2);
    if let Some(&b) = boundaries.iter().rev().find(|&&b| b < instance_value) {
        out.push(Predicate::LessThan(b));
    }
    if let Some(&b) = boundaries.iter().find(|&&b| b > instance_value) {
        out.push(Predicate::AtLeast(b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn petal_width_example() {
        // eleven values whose deciles sit on 0.2 .. 2.0 steps
        let cal: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
        let conds = discretize_feature(&cal, 1.7);
        assert_eq!(conds.len(), 2);
        match (conds[0], conds[1]) {
            (Predicate::LessThan(a), Predicate::AtLeast(b)) => {
                assert!((a - 1.6).abs() < 1e-12);
                assert!((b - 1.8).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn below_all_boundaries_is_one_sided() {
        let cal: Vec<f64> = (0..100).map(f64::from).collect();
        let conds = discretize_feature(&cal, -5.0);
        assert_eq!(conds.len(), 1);
        assert!(matches!(conds[0], Predicate::AtLeast(_)));
    }

    #[test]
    fn constant_feature_has_no_conditions() {
        assert!(discretize_feature(&[3.0; 50], 3.0).is_empty());
        assert!(decile_boundaries(&[]).is_empty());
    }

    #[test]
    fn deciles_of_a_known_sample() {
        let cal: Vec<f64> = (1..=11).map(f64::from).collect();
        let b = decile_boundaries(&cal);
        assert_eq!(b, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
    }

    proptest! {
        #[test]
        fn conditions_exclude_instance(
            cal in prop::collection::vec(-100.0f64..100.0, 1..60),
            x in -120.0f64..120.0,
        ) {
            let conds = discretize_feature(&cal, x);
            prop_assert!(conds.len() <= 2);
            for c in conds {
                prop_assert!(!c.holds(x));
            }
        }
    }
}
