//! Classifiers, the boosted regressor, cross-validation protocols and
//! evaluation metrics.

pub mod agreement;
pub mod cv;
pub mod forest;
pub mod gbt;
pub mod logistic;
pub mod metrics;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use agreement::{krippendorff_alpha, AgreementTable};
pub use cv::{grid_search, kfold_classify, mc_regress, EvalReport, RegressionReport, SplitScore};
pub use forest::{default_forest_grid, ForestParams, RandomForest};
pub use gbt::{GbtParams, GradientBoosting};
pub use logistic::{default_logistic_grid, LogisticParams, LogisticRegression};
pub use metrics::{classwise_f1, rmse, spearman, weighted_f1, Confusion};
pub use tree::MaxFeatures;

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_MC_SPLITS: usize = 20;
pub const DEFAULT_TRAIN_RATIO: f64 = 0.8;

/// Hyper-parameters of one model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelParams {
    RandomForest(ForestParams),
    LogisticRegression(LogisticParams),
    GradientBoostedTrees(GbtParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    RandomForest,
    LogisticRegression,
    GradientBoostedTrees,
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::LogisticRegression(_) => ModelKind::LogisticRegression,
            ModelParams::GradientBoostedTrees(_) => ModelKind::GradientBoostedTrees,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: ModelParams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Self { params, seed }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// Independent seed for sub-stream `stream` of `base` (SplitMix64 finaliser).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A fitted binary classifier of any family.
pub enum Classifier {
    Forest(RandomForest),
    Logistic(LogisticRegression),
    Boosted(GradientBoosting),
}

impl Classifier {
    /// `labels` are 0 or 1.
    pub fn fit(x: &[Vec<f64>], labels: &[usize], spec: &ModelSpec) -> Classifier {
        match &spec.params {
            ModelParams::RandomForest(p) => Classifier::Forest(RandomForest::fit(x, labels, 2, p, spec.seed)),
            ModelParams::LogisticRegression(p) => Classifier::Logistic(LogisticRegression::fit(x, labels, p)),
            ModelParams::GradientBoostedTrees(p) => {
                let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
                Classifier::Boosted(GradientBoosting::fit(x, &y, p))
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        match self {
            Classifier::Forest(m) => m.predict(row),
            Classifier::Logistic(m) => m.predict(row),
            Classifier::Boosted(m) => usize::from(m.predict(row) > 0.5),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 100);
        assert_eq!(derive_seed(7, 3), s[3]);
        assert_ne!(derive_seed(8, 3), s[3]);
    }

    #[test]
    fn spec_json_is_tagged() {
        let spec = ModelSpec::new(ModelParams::GradientBoostedTrees(GbtParams::default()), 1);
        let j = serde_json::to_string(&spec).unwrap();
        assert!(j.contains(r#""kind":"GradientBoostedTrees""#), "{j}");
        assert_eq!(serde_json::from_str::<ModelSpec>(&j).unwrap(), spec);
    }
}
