//! Bagged CART ensembles.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Task;

/// Hyperparameters for [`RandomForest::fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub rng_seed: u64,
    /// Features tried per split; `None` uses `floor(sqrt(F))` for
    /// classification and `ceil(F / 3)` for regression.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 2,
            rng_seed: 42,
            max_features: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn features_per_split(&self, n_features: usize, task: Task) -> usize {
        let default = match task {
            Task::Classification => (n_features as f64).sqrt().floor() as usize,
            Task::Regression => n_features.div_ceil(3),
        };
        self.max_features.unwrap_or(default).clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A binary regression/classification tree stored as a node arena; node 0 is
/// the root. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        assert!(!nodes.is_empty(), "a tree needs a root");
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    task: Task,
    n_features: usize,
}

impl RandomForest {
    /// Fits a forest on `rows`/`target`. Targets must already be validated
    /// (0/1 for classification).
    pub fn fit(rows: &[Vec<f64>], target: &[f64], task: Task, params: &ForestParams) -> Self {
        let n_features = rows.first().map_or(0, Vec::len);
        let mtry = params.features_per_split(n_features, task);
        let mut seeder = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let trees = (0..params.n_trees.max(1))
            .map(|_| {
                let mut rng = ChaCha8Rng::seed_from_u64(seeder.random());
                let samples: Vec<usize> = if params.bootstrap {
                    (0..rows.len()).map(|_| rng.random_range(0..rows.len())).collect()
                } else {
                    (0..rows.len()).collect()
                };
                let mut builder = TreeBuilder {
                    rows,
                    target,
                    task,
                    params,
                    mtry,
                    n_features,
                    rng: &mut rng,
                    nodes: Vec::new(),
                };
                builder.grow(samples, 0);
                DecisionTree { nodes: builder.nodes }
            })
            .collect();
        Self {
            trees,
            task,
            n_features,
        }
    }

    pub fn from_trees(trees: Vec<DecisionTree>, task: Task, n_features: usize) -> Self {
        Self {
            trees,
            task,
            n_features,
        }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Fraction of trees voting for class 1, or the mean tree prediction for
    /// regression.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let n = self.trees.len() as f64;
        match self.task {
            Task::Classification => {
                let votes = self.trees.iter().filter(|t| t.predict(x) >= 0.5).count();
                votes as f64 / n
            }
            Task::Regression => self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / n,
        }
    }
}

struct TreeBuilder<'a, R: Rng> {
    rows: &'a [Vec<f64>],
    target: &'a [f64],
    task: Task,
    params: &'a ForestParams,
    mtry: usize,
    n_features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

const MIN_GAIN: f64 = 1e-12;

impl<R: Rng> TreeBuilder<'_, R> {
    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(&samples),
        });
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if !depth_ok || samples.len() < 2 * self.params.min_samples_leaf.max(1) || self.is_pure(&samples) {
            return id;
        }
        let Some(best) = self.best_split(&samples) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.rows[i][best.feature] <= best.threshold);
        let left_id = self.grow(left, depth + 1);
        let right_id = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: left_id,
            right: right_id,
        };
        id
    }

    fn leaf_value(&self, samples: &[usize]) -> f64 {
        let mean = samples.iter().map(|&i| self.target[i]).sum::<f64>() / samples.len() as f64;
        match self.task {
            // majority vote, ties go to the positive class
            Task::Classification => {
                if mean >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            Task::Regression => mean,
        }
    }

    fn is_pure(&self, samples: &[usize]) -> bool {
        let first = self.target[samples[0]];
        samples.iter().all(|&i| self.target[i] == first)
    }

    fn best_split(&mut self, samples: &[usize]) -> Option<BestSplit> {
        let mut features: Vec<usize> = sample(self.rng, self.n_features, self.mtry).into_vec();
        features.sort_unstable();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let n = samples.len();
        let total: f64 = samples.iter().map(|&i| self.target[i]).sum();
        let total_sq: f64 = samples.iter().map(|&i| self.target[i].powi(2)).sum();
        let parent = impurity(self.task, total, total_sq, n as f64);

        let mut best: Option<BestSplit> = None;
        let mut order: Vec<usize> = samples.to_vec();
        for f in features {
            order.sort_by(|&a, &b| {
                self.rows[a][f]
                    .partial_cmp(&self.rows[b][f])
                    .unwrap_or(Ordering::Equal)
            });
            let (mut left_sum, mut left_sq) = (0.0, 0.0);
            for k in 0..n - 1 {
                let y = self.target[order[k]];
                left_sum += y;
                left_sq += y * y;
                let (xa, xb) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                let n_left = k + 1;
                let n_right = n - n_left;
                if xa == xb || n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let child = impurity(self.task, left_sum, left_sq, n_left as f64)
                    + impurity(self.task, total - left_sum, total_sq - left_sq, n_right as f64);
                let gain = parent - child;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain + MIN_GAIN) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: midpoint(xa, xb),
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint that is guaranteed to separate `a < b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Size-weighted node impurity: `n * gini` for 0/1 targets, the sum of
/// squared deviations for regression.
fn impurity(task: Task, sum: f64, sum_sq: f64, n: f64) -> f64 {
    match task {
        Task::Classification => {
            let p = sum / n;
            n * 2.0 * p * (1.0 - p)
        }
        Task::Regression => (sum_sq - sum * sum / n).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_tree(max_depth: Option<usize>, min_leaf: usize) -> ForestParams {
        ForestParams {
            n_trees: 1,
            max_depth,
            min_samples_leaf: min_leaf,
            rng_seed: 1,
            max_features: None,
            bootstrap: false,
        }
    }

    #[test]
    fn stump_separates_linearly_separable_data() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let target: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
        let forest = RandomForest::fit(&rows, &target, Task::Classification, &single_tree(Some(1), 1));
        let acc = rows
            .iter()
            .zip(&target)
            .filter(|(x, &y)| forest.predict(x) == y)
            .count();
        assert_eq!(acc, 10);
        assert_eq!(forest.trees()[0].depth(), 1);
        match forest.trees()[0].nodes()[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 4.5),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn constant_regression_target() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let target = vec![3.25; 20];
        let forest = RandomForest::fit(&rows, &target, Task::Regression, &ForestParams::default());
        for x in [vec![0.0, 0.0], vec![100.0, -3.0], vec![7.5, 2.0]] {
            assert_eq!(forest.predict(&x), 3.25);
        }
    }

    #[test]
    fn seeded_training_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i * 37 % 60) as f64, (i * 11 % 13) as f64, (i % 4) as f64])
            .collect();
        let target: Vec<f64> = rows.iter().map(|r| f64::from(r[0] + r[1] > 35.0)).collect();
        let params = ForestParams {
            n_trees: 15,
            ..ForestParams::default()
        };
        let a = RandomForest::fit(&rows, &target, Task::Classification, &params);
        let b = RandomForest::fit(&rows, &target, Task::Classification, &params);
        assert_eq!(a, b);
        let other = RandomForest::fit(
            &rows,
            &target,
            Task::Classification,
            &ForestParams {
                rng_seed: 43,
                ..params
            },
        );
        assert_ne!(a, other);
    }

    /// Six points with a unique hand-derived CART tree: the root split
    /// x0 <= 3.5 (weighted Gini gain 4/3) beats every x1 split (best 2/3); the
    /// right child is constant in x1 and splits at x0 <= 5.5.
    #[test]
    fn single_tree_matches_hand_built_cart() {
        let rows = vec![
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, 0.0],
            vec![4.0, 1.0],
            vec![5.0, 1.0],
            vec![6.0, 1.0],
        ];
        let target = vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        let params = ForestParams {
            max_features: Some(2),
            ..single_tree(None, 1)
        };
        let forest = RandomForest::fit(&rows, &target, Task::Classification, &params);
        let oracle = hand_built_tree();
        for x in rows.iter().chain(&[vec![0.0, 5.0], vec![10.0, 1.0], vec![3.5, 0.2], vec![5.2, 0.0]]) {
            assert_eq!(forest.predict(x), oracle.predict(x), "at {x:?}");
        }
        for (x, &y) in rows.iter().zip(&target) {
            assert_eq!(forest.predict(x), y);
        }
    }

    fn hand_built_tree() -> DecisionTree {
        // root: x0 <= 3.5 -> 0
        //       else x0 <= 5.5 -> 1 else 0
        DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 0,
                threshold: 3.5,
                left: 1,
                right: 2,
            },
            Node::Leaf { value: 0.0 },
            Node::Split {
                feature: 0,
                threshold: 5.5,
                left: 3,
                right: 4,
            },
            Node::Leaf { value: 1.0 },
            Node::Leaf { value: 0.0 },
        ])
    }

    #[test]
    fn vote_fraction() {
        let leaf = |v: f64| DecisionTree::from_nodes(vec![Node::Leaf { value: v }]);
        let forest = RandomForest::from_trees(
            vec![leaf(1.0), leaf(1.0), leaf(0.0), leaf(1.0)],
            Task::Classification,
            1,
        );
        assert_eq!(forest.predict(&[0.0]), 0.75);
    }
}
