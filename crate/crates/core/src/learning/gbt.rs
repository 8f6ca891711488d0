//! Least-squares gradient boosting with regression-tree base learners.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, MaxFeatures, Targets, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradientBoosting {
    init: f64,
    learning_rate: f64,
    trees: Vec<DecisionTree>,
    /// Training mean squared error of the initial constant model and after
    /// every boosting round.
    pub loss_history: Vec<f64>,
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

impl GradientBoosting {
    /// Each round fits a tree to the current residuals and adds it scaled by
    /// the learning rate. Trees consider every feature at each split, so the
    /// fit involves no randomness.
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &GbtParams) -> GradientBoosting {
        let n = y.len();
        let init = y.iter().sum::<f64>() / n as f64;
        let mut pred = vec![init; n];
        let mut loss_history = vec![mse(&pred, y)];
        let tp = TreeParams {
            max_depth: Some(params.max_depth),
            min_samples_split: 2,
            min_samples_leaf: params.min_samples_leaf,
            max_features: MaxFeatures::All,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut trees = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let residual: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| t - p).collect();
            let tree = DecisionTree::fit(x, Targets::Values(&residual), (0..n).collect(), tp, &mut rng);
            for (p, row) in pred.iter_mut().zip(x) {
                *p += params.learning_rate * tree.predict(row)[0];
            }
            loss_history.push(mse(&pred, y));
            trees.push(tree);
        }
        GradientBoosting {
            init,
            learning_rate: params.learning_rate,
            trees,
            loss_history,
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.init + self.trees.iter().map(|t| self.learning_rate * t.predict(row)[0]).sum::<f64>()
    }
}
