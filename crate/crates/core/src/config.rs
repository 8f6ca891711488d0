//! Run configuration: one TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Band, ABSTRACT_BAND, CONCRETE_BAND, DEFAULT_MIN_IMAGES, DEFAULT_MIN_SIDE};
use crate::error::{Error, Result};
use crate::features::codebook::{DEFAULT_K, DEFAULT_MAX_TRAINING};
use crate::features::Attribute;
use crate::learning::{
    default_forest_grid, default_logistic_grid, ForestParams, GbtParams, LogisticParams, ModelKind, DEFAULT_FOLDS,
    DEFAULT_MC_SPLITS, DEFAULT_TRAIN_RATIO,
};
use crate::objects::{DEFAULT_CONF_MIN, DETECTOR_CLASSES, HYPERNYM_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub norms: PathBuf,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Images per concept.
    #[serde(default = "default_condition")]
    pub condition: usize,
    #[serde(default = "default_attributes")]
    pub attributes: Vec<Attribute>,
    /// Worker threads; 0 uses every core. Never changes results.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub codebook: CodebookConfig,
    #[serde(default)]
    pub objects: ObjectsConfig,
    #[serde(default)]
    pub embeddings: EmbeddingsConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub regress: RegressConfig,
    #[serde(default)]
    pub neighbors: NeighborsConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_condition() -> usize {
    DEFAULT_MIN_IMAGES
}

fn default_attributes() -> Vec<Attribute> {
    Attribute::BASIC.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub min_side: u32,
    /// Side of the square every image is resampled to before extraction.
    pub canonical_side: usize,
    pub per_concept_cap: usize,
    pub abstract_band: Band,
    pub concrete_band: Band,
    /// Conditions listed in the availability table of `stats`.
    pub stats_conditions: Vec<usize>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            min_side: DEFAULT_MIN_SIDE,
            canonical_side: DEFAULT_MIN_SIDE as usize,
            per_concept_cap: 500,
            abstract_band: ABSTRACT_BAND,
            concrete_band: CONCRETE_BAND,
            stats_conditions: vec![25, 50, 100, 200, 500],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookConfig {
    pub k: usize,
    pub max_training: usize,
    pub max_points: usize,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            max_training: DEFAULT_MAX_TRAINING,
            max_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectsConfig {
    pub detections: Option<PathBuf>,
    pub hypernyms: Option<PathBuf>,
    pub class_count: usize,
    pub hypernym_count: usize,
    pub conf_min: f64,
}

impl Default for ObjectsConfig {
    fn default() -> Self {
        Self {
            detections: None,
            hypernyms: None,
            class_count: DETECTOR_CLASSES,
            hypernym_count: HYPERNYM_CLASSES,
            conf_min: DEFAULT_CONF_MIN,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingsConfig {
    pub vit: Option<PathBuf>,
    pub simclr: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub folds: usize,
    pub models: Vec<ModelKind>,
    pub forest_grid: Vec<ForestParams>,
    pub logistic_grid: Vec<LogisticParams>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            models: vec![ModelKind::RandomForest, ModelKind::LogisticRegression],
            forest_grid: default_forest_grid(),
            logistic_grid: default_logistic_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressConfig {
    pub splits: usize,
    pub train_ratio: f64,
    pub gbt: GbtParams,
}

impl Default for RegressConfig {
    fn default() -> Self {
        Self {
            splits: DEFAULT_MC_SPLITS,
            train_ratio: DEFAULT_TRAIN_RATIO,
            gbt: GbtParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeighborsConfig {
    /// Neighbours per image; defaults to the condition.
    pub topn: Option<usize>,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, norms: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            norms: norms.into(),
            out: default_out(),
            seed: 0,
            condition: default_condition(),
            attributes: default_attributes(),
            workers: 0,
            corpus: CorpusConfig::default(),
            codebook: CodebookConfig::default(),
            objects: ObjectsConfig::default(),
            embeddings: EmbeddingsConfig::default(),
            classify: ClassifyConfig::default(),
            regress: RegressConfig::default(),
            neighbors: NeighborsConfig::default(),
        }
    }

    pub fn from_toml(text: &str, source_name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::parse(source_name, line, e.message().to_string())
        })
    }

    /// Read a TOML file; relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.manifest);
        fix(&mut self.norms);
        fix(&mut self.out);
        for p in [
            &mut self.objects.detections,
            &mut self.objects.hypernyms,
            &mut self.embeddings.vit,
            &mut self.embeddings.simclr,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form,
    /// leaving out settings that cannot change results (`workers`, `out`).
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        let obj = v.as_object_mut().expect("config is an object");
        obj.remove("workers");
        obj.remove("out");
        let digest = Sha256::digest(v.to_string().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(self.hash())
    }

    pub fn wants(&self, attr: Attribute) -> bool {
        self.attributes.contains(&attr)
    }

    pub fn topn(&self) -> usize {
        self.neighbors.topn.unwrap_or(self.condition)
    }

    pub fn validate(&self) -> Result<()> {
        let exists = |p: &Path, what: &str| {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::validation(format!("{what} `{}` does not exist", p.display())))
            }
        };
        exists(&self.manifest, "manifest")?;
        exists(&self.norms, "norms file")?;
        if self.attributes.is_empty() {
            return Err(Error::validation("no attributes requested"));
        }
        if self.condition < 2 {
            return Err(Error::validation("condition must be at least 2 images per concept"));
        }
        if self.corpus.canonical_side < 16 {
            return Err(Error::validation("canonical_side must be at least 16 pixels"));
        }
        if self.classify.folds < 2 {
            return Err(Error::validation("classify.folds must be at least 2"));
        }
        if self.codebook.k < 1 {
            return Err(Error::validation("codebook.k must be positive"));
        }
        if self.wants(Attribute::Yolo) || self.wants(Attribute::ObjectLoc) {
            let d = self.objects.detections.as_deref().ok_or_else(|| {
                Error::validation("YOLO/ObjectLoc need `objects.detections` to name a detections file")
            })?;
            exists(d, "detections file")?;
        }
        if self.wants(Attribute::Yolo) {
            let h = self.objects.hypernyms.as_deref().ok_or_else(|| {
                Error::validation("YOLO needs `objects.hypernyms` to name a hypernym map")
            })?;
            exists(h, "hypernym map")?;
        }
        for (attr, path) in [(Attribute::Vit, &self.embeddings.vit), (Attribute::SimClr, &self.embeddings.simclr)] {
            if self.wants(attr) {
                let p = path.as_deref().ok_or_else(|| {
                    Error::validation(format!("{attr} needs an embeddings file under `embeddings`"))
                })?;
                exists(p, "embeddings file")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_uses_defaults() {
        let cfg = RunConfig::from_toml("manifest = \"m.jsonl\"\nnorms = \"n.csv\"\n", "cfg").unwrap();
        assert_eq!(cfg.condition, 25);
        assert_eq!(cfg.attributes, Attribute::BASIC.to_vec());
        assert_eq!(cfg.classify.forest_grid.len(), 48);
        assert_eq!(cfg.codebook.k, 256);
        assert_eq!(cfg, RunConfig::new("m.jsonl", "n.csv"));
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::new("m.jsonl", "n.csv");
        cfg.attributes = vec![Attribute::Color, Attribute::Vit];
        cfg.embeddings.vit = Some("v.vdem".into());
        let back = RunConfig::from_toml(&cfg.to_toml(), "cfg").unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let err = RunConfig::from_toml("manifest = \"m\"\nnorms = \"n\"\nbogus = 1\n", "cfg.toml").unwrap_err();
        assert!(err.to_string().starts_with("cfg.toml:3:"), "{err}");
    }

    #[test]
    fn hash_ignores_workers_and_out() {
        let a = RunConfig::new("m.jsonl", "n.csv");
        let mut b = a.clone();
        b.workers = 7;
        b.out = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn relative_paths_resolve_against_base() {
        let mut cfg = RunConfig::new("m.jsonl", "/abs/n.csv");
        cfg.objects.detections = Some("d.jsonl".into());
        cfg.resolve_paths(Path::new("/data"));
        assert_eq!(cfg.manifest, PathBuf::from("/data/m.jsonl"));
        assert_eq!(cfg.norms, PathBuf::from("/abs/n.csv"));
        assert_eq!(cfg.objects.detections, Some(PathBuf::from("/data/d.jsonl")));
    }

    #[test]
    fn validation_names_the_problem() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.jsonl");
        let n = dir.path().join("n.csv");
        std::fs::write(&m, "").unwrap();
        std::fs::write(&n, "word,concreteness\n").unwrap();
        let mut cfg = RunConfig::new(&m, &n);
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("objects.detections"), "{err}");
        cfg.attributes = vec![Attribute::Color];
        cfg.validate().unwrap();
        cfg.norms = dir.path().join("missing.csv");
        assert!(cfg.validate().unwrap_err().to_string().contains("missing.csv"));
    }
}
