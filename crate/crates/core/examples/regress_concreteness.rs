// Predict concreteness ratings with gradient-boosted trees over repeated
// random 80/20 splits, scored by Spearman correlation and RMSE.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visdiv::diversity::ConceptSample;
use visdiv::features::Attribute;
use visdiv::learning::{mc_regress, GbtParams};

pub fn run_example() -> visdiv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<ConceptSample> = (0..60)
        .map(|i| {
            let rating = 1.0 + 4.0 * i as f64 / 59.0;
            ConceptSample {
                lemma: format!("w{i:02}"),
                class_label: None,
                rating: Some(rating),
                vector: vec![rating + rng.random_range(-0.3..0.3), rng.random_range(0.0..1.0)],
                attribute_manifest: vec![(Attribute::Gist, 2)],
            }
        })
        .collect();
    let report = mc_regress(&samples, &GbtParams::default(), 20, 0.8, 0)?;
    println!("Spearman rho {:.3}, RMSE {:.3} over {} splits", report.spearman_rho, report.rmse, report.split_scores.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
