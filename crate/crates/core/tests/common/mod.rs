#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use visdiv::config::RunConfig;
use visdiv::features::Attribute;
use visdiv::learning::{ForestParams, GbtParams, MaxFeatures};
use visdiv::synthetic::{generate, SyntheticCorpus, SyntheticSpec};

/// A procedural corpus at 64 px with a configuration scaled to it: all seven
/// basic attributes plus ViT, a small vocabulary and a one-point forest grid.
pub fn synthetic_run(root: &Path, spec: &SyntheticSpec) -> (SyntheticCorpus, RunConfig) {
    let corpus = generate(&root.join("corpus"), spec).unwrap();
    let mut cfg = RunConfig::new(&corpus.manifest, &corpus.norms);
    cfg.out = root.join("runs");
    cfg.seed = 7;
    cfg.condition = spec.images_per_concept;
    cfg.attributes = Attribute::BASIC.to_vec();
    cfg.attributes.push(Attribute::Vit);
    cfg.corpus.min_side = spec.side as u32;
    cfg.corpus.canonical_side = spec.side;
    cfg.codebook.k = 16;
    cfg.codebook.max_points = 60;
    cfg.objects.detections = Some(corpus.detections.clone());
    cfg.objects.hypernyms = Some(corpus.hypernyms.clone());
    cfg.objects.class_count = spec.detector_classes;
    cfg.objects.hypernym_count = spec.hypernyms;
    cfg.embeddings.vit = Some(corpus.vit.clone());
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
    (corpus, cfg)
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
