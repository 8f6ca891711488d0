// Abstract vs. concrete classification with a grid-searched random forest
// and a logistic regression under stratified 5-fold cross-validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visdiv::corpus::ClassLabel;
use visdiv::diversity::ConceptSample;
use visdiv::features::Attribute;
use visdiv::learning::{grid_search, kfold_classify, ForestParams, LogisticParams, MaxFeatures, ModelParams, ModelSpec};

pub fn run_example() -> visdiv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<ConceptSample> = (0..40)
        .map(|i| {
            let label = if i % 2 == 0 { ClassLabel::Abstract } else { ClassLabel::Concrete };
            let centre = if label == ClassLabel::Concrete { 2.0 } else { 0.0 };
            ConceptSample {
                lemma: format!("w{i:02}"),
                class_label: Some(label),
                rating: None,
                vector: (0..6).map(|_| centre + rng.random_range(-1.0..1.0)).collect(),
                attribute_manifest: vec![(Attribute::Color, 6)],
            }
        })
        .collect();
    let grid: Vec<ModelParams> = [10, 40]
        .into_iter()
        .flat_map(|n| {
            [Some(3), None].into_iter().map(move |d| {
                ModelParams::RandomForest(ForestParams {
                    n_estimators: n,
                    max_depth: d,
                    max_features: MaxFeatures::Sqrt,
                    ..ForestParams::default()
                })
            })
        })
        .collect();
    let (best, forest) = grid_search(&samples, &grid, 5, 0)?;
    println!("random forest: best config {:?}, weighted F1 {:.3}", best.params, forest.weighted_f1);
    let lr = kfold_classify(&samples, &ModelSpec::new(ModelParams::LogisticRegression(LogisticParams::default()), 0), 5, 0)?;
    println!("logistic regression: weighted F1 {:.3}, per class {:?}", lr.weighted_f1, lr.per_class_f1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
