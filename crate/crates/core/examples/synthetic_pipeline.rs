// Generate a small procedural corpus and run every pipeline step on it:
// ingest, codebook, extract, diversity, classify, regress, neighbors and
// stats, ending with `summary.md`.

use visdiv::config::RunConfig;
use visdiv::features::Attribute;
use visdiv::learning::{ForestParams, GbtParams, MaxFeatures};
use visdiv::pipeline::{Pipeline, COMBINED_BASIC};
use visdiv::synthetic::{generate, SyntheticSpec};

pub fn run_example() -> visdiv::Result<()> {
    let root = std::env::temp_dir().join(format!("visdiv-synthetic-{}", std::process::id()));
    let corpus = generate(&root.join("corpus"), &SyntheticSpec::default())?;

    let mut cfg = RunConfig::new(&corpus.manifest, &corpus.norms);
    cfg.out = root.join("runs");
    cfg.seed = 7;
    cfg.attributes = Attribute::ALL.to_vec();
    cfg.corpus.min_side = 64;
    cfg.corpus.canonical_side = 64;
    cfg.codebook.k = 16;
    cfg.codebook.max_points = 60;
    cfg.objects.detections = Some(corpus.detections.clone());
    cfg.objects.hypernyms = Some(corpus.hypernyms.clone());
    cfg.objects.class_count = 24;
    cfg.objects.hypernym_count = 6;
    cfg.embeddings.vit = Some(corpus.vit.clone());
    cfg.embeddings.simclr = None;
    cfg.attributes.retain(|a| *a != Attribute::SimClr);
    cfg.classify.folds = 4;
    cfg.classify.forest_grid = vec![ForestParams {
        n_estimators: 50,
        max_features: MaxFeatures::Sqrt,
        ..ForestParams::default()
    }];
    cfg.regress.splits = 5;
    cfg.regress.gbt = GbtParams {
        n_estimators: 30,
        ..GbtParams::default()
    };

    let pipeline = Pipeline::new(cfg)?;
    let summary = pipeline.report(None)?;
    println!("{}", std::fs::read_to_string(&summary).map_err(|e| visdiv::Error::Validation(e.to_string()))?);

    let combined = pipeline
        .classify()?
        .into_iter()
        .find(|r| r.feature_set == COMBINED_BASIC)
        .expect("all basic attributes were extracted");
    println!("{COMBINED_BASIC}: weighted F1 {:.3}", combined.report.weighted_f1);
    let _ = std::fs::remove_dir_all(&root);
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
