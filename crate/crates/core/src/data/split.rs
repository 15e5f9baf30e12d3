use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::{Error, Result};

/// Proper training, calibration and test partitions of one dataset.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub proper_training: Dataset,
    pub calibration: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Shuffles the rows with `seed`; the first `test_size` rows become the test
/// set, the next `cal_size` the calibration set and the rest the proper
/// training set.
pub fn split(dataset: &Dataset, cal_size: usize, test_size: usize, seed: u64) -> Result<DataSplit> {
    let requested = cal_size + test_size;
    if requested >= dataset.len() {
        return Err(Error::SplitTooLarge {
            requested,
            available: dataset.len(),
        });
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, rest) = idx.split_at(test_size);
    let (cal, train) = rest.split_at(cal_size);
    Ok(DataSplit {
        proper_training: dataset.subset(train),
        calibration: dataset.subset(cal),
        test: dataset.subset(test),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_regression;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn exact_calibration_size() {
        let ds = synth_regression(1000, 1).dataset;
        let s = split(&ds, 100, 200, 7).unwrap();
        assert_eq!(s.calibration.len(), 100);
        assert_eq!(s.test.len(), 200);
        assert_eq!(s.proper_training.len(), 700);
    }

    #[test]
    fn same_seed_same_split() {
        let ds = synth_regression(300, 1).dataset;
        let a = split(&ds, 50, 50, 9).unwrap();
        let b = split(&ds, 50, 50, 9).unwrap();
        assert_eq!(a.calibration.ids, b.calibration.ids);
        assert_eq!(a.test.ids, b.test.ids);
        let c = split(&ds, 50, 50, 10).unwrap();
        assert_ne!(a.calibration.ids, c.calibration.ids);
    }

    #[test]
    fn oversized_split_is_rejected() {
        let ds = synth_regression(1000, 1).dataset;
        let err = split(&ds, 500, 600, 0).unwrap_err();
        assert!(matches!(err, Error::SplitTooLarge { requested: 1100, available: 1000 }));
        assert!(split(&ds, 500, 500, 0).is_err());
    }

    proptest! {
        #[test]
        fn disjoint_and_exact(n in 3usize..200, seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let ds = synth_regression(n, 3).dataset;
            let cal = ((n - 1) as f64 * a * 0.5) as usize;
            let test = ((n - 1 - cal) as f64 * b) as usize;
            prop_assume!(cal + test < n);
            let s = split(&ds, cal, test, seed).unwrap();
            prop_assert_eq!(s.calibration.len(), cal);
            prop_assert_eq!(s.test.len(), test);
            prop_assert_eq!(s.proper_training.len(), n - cal - test);
            let mut seen = HashSet::new();
            for id in s.calibration.ids.iter().chain(&s.test.ids).chain(&s.proper_training.ids) {
                prop_assert!(seen.insert(*id));
            }
            prop_assert_eq!(seen.len(), n);
        }
    }
}
