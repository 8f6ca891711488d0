//! Random forest: bootstrap-bagged CART classifiers with per-node feature
//! subsampling. Class probabilities are averaged over trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::tree::{DecisionTree, MaxFeatures, Targets, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

impl ForestParams {
    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
        }
    }
}

/// Grid over estimators, depth, split size, leaf size and feature
/// subsampling, expanded with the first axis outermost.
pub fn default_forest_grid() -> Vec<ForestParams> {
    let mut grid = Vec::new();
    for n_estimators in [100, 300] {
        for max_depth in [None, Some(8), Some(16)] {
            for min_samples_split in [2, 5] {
                for min_samples_leaf in [1, 3] {
                    for max_features in [MaxFeatures::Sqrt, MaxFeatures::All] {
                        grid.push(ForestParams {
                            n_estimators,
                            max_depth,
                            min_samples_split,
                            min_samples_leaf,
                            max_features,
                        });
                    }
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and feature subsets from a stream
    /// seeded by `(seed, t)`, so the fit does not depend on thread count.
    pub fn fit(x: &[Vec<f64>], labels: &[usize], n_classes: usize, params: &ForestParams, seed: u64) -> RandomForest {
        let n = x.len();
        let tp = params.tree_params();
        let trees = (0..params.n_estimators.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let targets = Targets::Classes { labels, n_classes };
                DecisionTree::fit(x, targets, idx, tp, &mut rng)
            })
            .collect();
        RandomForest { trees, n_classes }
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (acc, v) in p.iter_mut().zip(t.predict(row)) {
                *acc += v;
            }
        }
        let m = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= m);
        p
    }

    /// Most probable class; ties go to the lowest class index.
    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(&self.predict_proba(row))
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = default_forest_grid();
        assert_eq!(g.len(), 48);
        assert_eq!(g[0].n_estimators, 100);
        assert_eq!(g[0].max_depth, None);
        assert_eq!(g[1].max_features, MaxFeatures::All);
        assert_eq!(g[47].n_estimators, 300);
    }

    #[test]
    fn separable_data_is_learned() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
        let p = ForestParams {
            n_estimators: 25,
            ..ForestParams::default()
        };
        let rf = RandomForest::fit(&x, &y, 2, &p, 9);
        assert_eq!(rf.n_trees(), 25);
        assert_eq!(rf.predict(&[2.0, 0.0]), 0);
        assert_eq!(rf.predict(&[37.0, 0.0]), 1);
        let pr = rf.predict_proba(&[10.0, 3.0]);
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_forest() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i * 7 % 11) as f64, (i * 3 % 5) as f64]).collect();
        let y: Vec<usize> = (0..30).map(|i| i % 2).collect();
        let p = ForestParams {
            n_estimators: 10,
            ..ForestParams::default()
        };
        let a = RandomForest::fit(&x, &y, 2, &p, 4);
        let b = RandomForest::fit(&x, &y, 2, &p, 4);
        assert!(x.iter().all(|r| a.predict_proba(r) == b.predict_proba(r)));
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.8]), 1);
    }
}
