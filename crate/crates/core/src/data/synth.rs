use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, Schema};
use crate::model::Task;

/// A generated dataset and the noise-free quantity behind each row: the
/// positive-class posterior for classification, the signal for regression.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub truth: Vec<f64>,
}

fn uniform_rows(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()
}

fn schema() -> Schema {
    Schema::numeric(vec!["x1".into(), "x2".into()])
}

/// `x ~ U[0,1]^2`, `y ~ Bernoulli(x1)`.
pub fn synth_classification(n: usize, seed: u64) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = uniform_rows(n, &mut rng);
    let truth: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let target = truth.iter().map(|&p| f64::from(rng.random::<f64>() < p)).collect();
    let dataset = Dataset::new(schema(), rows, target, "y", Task::Classification).expect("valid by construction");
    SyntheticData { dataset, truth }
}

/// `x ~ U[0,1]^2`, `y = 10 x1 + N(0, 1)`.
pub fn synth_regression(n: usize, seed: u64) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = uniform_rows(n, &mut rng);
    let truth: Vec<f64> = rows.iter().map(|r| 10.0 * r[0]).collect();
    let target = truth
        .iter()
        .map(|&s| s + Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect::<Vec<f64>>();
    let dataset = Dataset::new(schema(), rows, target, "y", Task::Regression).expect("valid by construction");
    SyntheticData { dataset, truth }
}
