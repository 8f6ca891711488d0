//! End-to-end runner behind the command-line subcommands.
//!
//! Every step reads its inputs from, and writes its outputs to, a run
//! directory `<out>/<config hash>/`, so steps can be run one at a time or
//! all together. Work is spread over a private thread pool; all results are
//! gathered in a fixed order, so the worker count never changes an output
//! byte.
//!
//! Layout of the run directory:
//!
//! ```text
//! config.toml
//! ingest/manifest.jsonl   ingest/rejects.jsonl   ingest/summary.json
//! codebook.vdcb           codebook.json
//! features/<Attribute>.jsonl   features/failures.jsonl   features/summary.json
//! diversity/c<N>/selection.json   diversity/c<N>/spectra.jsonl
//! reports/classify_c<N>.json|.svg   reports/classwise_c<N>.svg
//! reports/regress_c<N>.json
//! reports/neighbors_c<N>.json|.csv|.svg   reports/similarity_c<N>.csv
//! reports/stats.json
//! summary.md
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::{self, partition_manifest, ClassLabel, ImageRecord, Manifest, Partition, Reject};
use crate::diversity::{combine, eigenspectrum, similarity_matrix, ConceptSample, EigenSpectrum};
use crate::embeddings::ingest_embeddings;
use crate::error::{Error, Result};
use crate::features::codebook::sample_descriptors;
use crate::features::gist::GistBank;
use crate::features::{
    bow_encode, build_codebook, color_hsv, detect_and_describe, hog, texture, Attribute, CodeBook, FeatureStore,
    FeatureVector, KMeansOptions, SurfOptions,
};
use crate::learning::{
    grid_search, kfold_classify, krippendorff_alpha, mc_regress, AgreementTable, EvalReport, ModelKind, ModelParams,
    ModelSpec, RegressionReport,
};
use crate::neighbors::{neighbor_report, write_class_table, NeighborIndex, NeighborReport};
use crate::objects::{availability_stats, hypernym_counts, ingest_detections, location_grid, HypernymMap};
use crate::pixels::{normalize_image, PixelGrid};
use crate::plots;

/// Name of the concatenated seven-attribute feature set.
pub const COMBINED_BASIC: &str = "Combined Basic";

/// Wrapper written around every report: which configuration and seed
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub config_hash: String,
    pub seed: u64,
    pub condition: usize,
    pub results: T,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub input_records: usize,
    pub kept: usize,
    pub size_or_cap_rejects: usize,
    pub duplicates: usize,
    pub unreadable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSummary {
    pub k: usize,
    pub dim: usize,
    pub seed: u64,
    pub training_size: usize,
    pub images: usize,
    pub inertia_history: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttributeExtract {
    pub rows: usize,
    pub new_rows: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub attributes: BTreeMap<Attribute, AttributeExtract>,
    pub rejected_detections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub image_id: String,
    pub attribute: Attribute,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedConcept {
    pub lemma: String,
    pub class_label: ClassLabel,
    pub rating: f64,
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub condition: usize,
    pub attributes: Vec<Attribute>,
    pub concepts: Vec<SelectedConcept>,
    /// Concepts dropped because fewer than `condition` of their images
    /// have every attribute, with the number that do.
    pub dropped: BTreeMap<String, usize>,
}

impl Selection {
    pub fn count(&self, label: ClassLabel) -> usize {
        self.concepts.iter().filter(|c| c.class_label == label).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRow {
    pub feature_set: String,
    pub model: ModelKind,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressRow {
    pub feature_set: String,
    pub report: RegressionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityRow {
    pub condition: usize,
    pub abstract_concepts: usize,
    pub concrete_concepts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub partition: corpus::PartitionReport,
    pub availability: Vec<AvailabilityRow>,
    pub selected_abstract: usize,
    pub selected_concrete: usize,
    /// Percentage of images with at least one detection, per class.
    pub detection_availability: Option<crate::objects::AvailabilityStats>,
    pub extraction_failures: usize,
    pub krippendorff_alpha: Option<f64>,
}

pub struct Pipeline {
    cfg: RunConfig,
    hash: String,
    dir: PathBuf,
    pool: rayon::ThreadPool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, step: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::validation(format!("`{}` is missing; run the `{step}` step first", path.display()))
        } else {
            Error::io(path, e)
        }
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn mkdirs(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

impl Pipeline {
    /// Validate the configuration, create the run directory and record the
    /// configuration in it.
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let hash = cfg.hash();
        let dir = cfg.run_dir();
        mkdirs(&dir)?;
        write_text(&dir.join("config.toml"), &cfg.to_toml())?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::validation(format!("cannot start {} workers: {e}", cfg.workers)))?;
        log::info!("run directory {}", dir.display());
        Ok(Self { cfg, hash, dir, pool })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn envelope<T>(&self, results: T) -> Envelope<T> {
        Envelope {
            config_hash: self.hash.clone(),
            seed: self.cfg.seed,
            condition: self.cfg.condition,
            results,
        }
    }

    fn feature_path(&self, attr: Attribute) -> PathBuf {
        self.dir.join("features").join(format!("{}.jsonl", attr.name()))
    }

    fn condition_dir(&self) -> PathBuf {
        self.dir.join("diversity").join(format!("c{}", self.cfg.condition))
    }

    fn report_path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join("reports").join(format!("{stem}_c{}.{ext}", self.cfg.condition))
    }

    fn codebook_path(&self) -> PathBuf {
        self.dir.join("codebook.vdcb")
    }

    fn ingested_records(&self) -> Result<Vec<ImageRecord>> {
        let path = self.dir.join("ingest").join("manifest.jsonl");
        if !path.exists() {
            return Err(Error::validation(format!(
                "`{}` is missing; run the `ingest` step first",
                path.display()
            )));
        }
        Manifest::read_records(&path)
    }

    fn partition(&self, min_images: usize) -> Result<Partition> {
        let records = self.ingested_records()?;
        let manifest = Manifest::new(records, self.cfg.corpus.per_concept_cap)?;
        let norms = corpus::load_norms(&self.cfg.norms, self.cfg.corpus.abstract_band, self.cfg.corpus.concrete_band)?;
        Ok(partition_manifest(&manifest, &norms, min_images))
    }

    /// Size filter, per-concept cap and exact-duplicate removal.
    pub fn ingest(&self) -> Result<IngestSummary> {
        self.pool.install(|| {
            let records = Manifest::read_records(&self.cfg.manifest)?;
            let input_records = records.len();
            let (manifest, mut rejects) =
                Manifest::filtered(records, self.cfg.corpus.min_side, self.cfg.corpus.per_concept_cap)?;
            let size_rejects = rejects.len();
            let dedup = corpus::dedup_exact(&manifest.records, |r| PixelGrid::decode(&r.source_path));
            rejects.extend(dedup.rejects.iter().cloned());
            rejects.extend(dedup.dropped.iter().map(|id| Reject {
                image_id: id.clone(),
                reason: "exact duplicate".into(),
            }));
            let kept: Vec<ImageRecord> = dedup
                .kept
                .into_iter()
                .map(|mut r| {
                    r.source_path = std::path::absolute(&r.source_path).unwrap_or(r.source_path);
                    r
                })
                .collect();
            let dir = self.dir.join("ingest");
            mkdirs(&dir)?;
            corpus::write_jsonl(&dir.join("manifest.jsonl"), &kept)?;
            corpus::write_jsonl(&dir.join("rejects.jsonl"), &rejects)?;
            let summary = IngestSummary {
                input_records,
                kept: kept.len(),
                size_or_cap_rejects: size_rejects,
                duplicates: dedup.dropped.len(),
                unreadable: dedup.rejects.len(),
            };
            write_json(&dir.join("summary.json"), &summary)?;
            log::info!("ingest: kept {} of {input_records} images", summary.kept);
            Ok(summary)
        })
    }

    fn surf_options(&self) -> SurfOptions {
        SurfOptions {
            max_points: self.cfg.codebook.max_points,
            ..SurfOptions::default()
        }
    }

    fn load_image(&self, r: &ImageRecord) -> Result<PixelGrid> {
        normalize_image(&PixelGrid::decode(&r.source_path)?, self.cfg.corpus.canonical_side)
    }

    /// Train the visual vocabulary on a seeded sample of descriptors from
    /// all ingested images.
    pub fn codebook(&self) -> Result<CodebookSummary> {
        self.pool.install(|| {
            let records = self.ingested_records()?;
            let opts = self.surf_options();
            let per_image: Vec<Option<Vec<Vec<f64>>>> = records
                .par_iter()
                .map(|r| match self.load_image(r) {
                    Ok(img) => Some(detect_and_describe(&img, &opts).into_iter().map(|p| p.descriptor).collect()),
                    Err(e) => {
                        log::warn!("codebook: skipping {}: {e}", r.image_id);
                        None
                    }
                })
                .collect();
            let images = per_image.iter().filter(|p| p.is_some()).count();
            let all: Vec<Vec<f64>> = per_image.into_iter().flatten().flatten().collect();
            let sample = sample_descriptors(all, self.cfg.codebook.max_training, self.cfg.seed);
            let book = build_codebook(&sample, &KMeansOptions::new(self.cfg.codebook.k, self.cfg.seed))?;
            book.save(&self.codebook_path())?;
            let summary = CodebookSummary {
                k: book.k,
                dim: book.dim,
                seed: book.seed,
                training_size: book.training_size,
                images,
                inertia_history: book.inertia_history.clone(),
            };
            write_json(&self.dir.join("codebook.json"), &summary)?;
            log::info!("codebook: k={} from {} descriptors", book.k, book.training_size);
            Ok(summary)
        })
    }

    /// Compute every requested attribute for every ingested image that does
    /// not have it yet.
    pub fn extract(&self) -> Result<ExtractSummary> {
        self.pool.install(|| self.extract_inner())
    }

    fn extract_inner(&self) -> Result<ExtractSummary> {
        let records = self.ingested_records()?;
        mkdirs(&self.dir.join("features"))?;
        let mut summary = ExtractSummary::default();
        let mut failures: Vec<Failure> = Vec::new();
        let mut stores: BTreeMap<Attribute, FeatureStore> = BTreeMap::new();
        for &a in &self.cfg.attributes {
            stores.insert(a, FeatureStore::load(&self.feature_path(a))?);
        }

        let pixel_attrs: Vec<Attribute> =
            self.cfg.attributes.iter().copied().filter(|a| Attribute::IMAGE_BASED.contains(a)).collect();
        let book = if pixel_attrs.contains(&Attribute::Surf) {
            let path = self.codebook_path();
            if !path.exists() {
                return Err(Error::validation(
                    "SURF needs a visual vocabulary; run the `codebook` step first",
                ));
            }
            Some(CodeBook::load(&path)?)
        } else {
            None
        };
        let side = self.cfg.corpus.canonical_side;
        let bank = pixel_attrs.contains(&Attribute::Gist).then(|| GistBank::new(side, side));
        let opts = self.surf_options();

        let todo: Vec<(&ImageRecord, Vec<Attribute>)> = records
            .iter()
            .filter_map(|r| {
                let missing: Vec<Attribute> =
                    pixel_attrs.iter().copied().filter(|a| !stores[a].contains(&r.image_id)).collect();
                (!missing.is_empty()).then_some((r, missing))
            })
            .collect();
        let computed: Vec<Vec<(Attribute, Result<FeatureVector>)>> = todo
            .par_iter()
            .map(|(r, missing)| {
                let img = match self.load_image(r) {
                    Ok(img) => img,
                    Err(e) => {
                        let msg = e.to_string();
                        return missing.iter().map(|&a| (a, Err(Error::Validation(msg.clone())))).collect();
                    }
                };
                missing
                    .iter()
                    .map(|&a| {
                        let id = r.image_id.as_str();
                        let fv = match a {
                            Attribute::Color => Ok(color_hsv(id, &img)),
                            Attribute::Hog => hog(id, &img),
                            Attribute::Texture => texture(id, &img),
                            Attribute::Gist => Ok(bank.as_ref().expect("bank built for GIST").describe(id, &img)),
                            Attribute::Surf => {
                                bow_encode(id, &detect_and_describe(&img, &opts), book.as_ref().expect("codebook loaded"))
                            }
                            _ => unreachable!("only pixel attributes are computed here"),
                        };
                        (a, fv)
                    })
                    .collect()
            })
            .collect();
        for ((r, _), results) in todo.iter().zip(computed) {
            for (a, fv) in results {
                let entry = summary.attributes.entry(a).or_default();
                match fv {
                    Ok(fv) => {
                        stores.get_mut(&a).expect("store loaded").insert(fv)?;
                        entry.new_rows += 1;
                    }
                    Err(e) => {
                        log::warn!("extract {a}: skipping {}: {e}", r.image_id);
                        entry.failures += 1;
                        failures.push(Failure {
                            image_id: r.image_id.clone(),
                            attribute: a,
                            reason: e.to_string(),
                        });
                    }
                }
            }
        }

        if self.cfg.wants(Attribute::Yolo) || self.cfg.wants(Attribute::ObjectLoc) {
            let path = self.cfg.objects.detections.as_deref().expect("validated");
            let dets = ingest_detections(path, self.cfg.objects.class_count)?;
            summary.rejected_detections = dets.reject_count();
            let map = match self.cfg.wants(Attribute::Yolo) {
                true => Some(HypernymMap::load(
                    self.cfg.objects.hypernyms.as_deref().expect("validated"),
                    self.cfg.objects.hypernym_count,
                )?),
                false => None,
            };
            for r in &records {
                let d = dets.get(&r.image_id);
                if let Some(map) = &map {
                    if !stores[&Attribute::Yolo].contains(&r.image_id) {
                        let fv = hypernym_counts(&r.image_id, d, map, self.cfg.objects.conf_min)?;
                        stores.get_mut(&Attribute::Yolo).expect("store loaded").insert(fv)?;
                        summary.attributes.entry(Attribute::Yolo).or_default().new_rows += 1;
                    }
                }
                if self.cfg.wants(Attribute::ObjectLoc) && !stores[&Attribute::ObjectLoc].contains(&r.image_id) {
                    stores.get_mut(&Attribute::ObjectLoc).expect("store loaded").insert(location_grid(&r.image_id, d))?;
                    summary.attributes.entry(Attribute::ObjectLoc).or_default().new_rows += 1;
                }
            }
        }

        for (attr, path) in [(Attribute::Vit, &self.cfg.embeddings.vit), (Attribute::SimClr, &self.cfg.embeddings.simclr)] {
            if !self.cfg.wants(attr) {
                continue;
            }
            let rows = ingest_embeddings(path.as_deref().expect("validated"), None)?;
            let store = stores.get_mut(&attr).expect("store loaded");
            for r in &records {
                if store.contains(&r.image_id) {
                    continue;
                }
                match rows.get(&r.image_id) {
                    Some(fv) if fv.attribute == attr => {
                        store.insert(fv.clone())?;
                        summary.attributes.entry(attr).or_default().new_rows += 1;
                    }
                    Some(fv) => {
                        return Err(Error::validation(format!(
                            "embeddings configured for {attr} hold {} vectors",
                            fv.attribute
                        )))
                    }
                    None => {
                        summary.attributes.entry(attr).or_default().failures += 1;
                        failures.push(Failure {
                            image_id: r.image_id.clone(),
                            attribute: attr,
                            reason: "no embedding row".into(),
                        });
                    }
                }
            }
        }

        for (attr, store) in &stores {
            store.save(&self.feature_path(*attr))?;
            summary.attributes.entry(*attr).or_default().rows = store.len();
        }
        corpus::write_jsonl(&self.dir.join("features").join("failures.jsonl"), &failures)?;
        write_json(&self.dir.join("features").join("summary.json"), &summary)?;
        for (a, s) in &summary.attributes {
            log::info!("extract {a}: {} rows ({} new, {} failed)", s.rows, s.new_rows, s.failures);
        }
        Ok(summary)
    }

    fn load_stores(&self) -> Result<BTreeMap<Attribute, FeatureStore>> {
        let mut stores = BTreeMap::new();
        for &a in &self.cfg.attributes {
            let path = self.feature_path(a);
            if !path.exists() {
                return Err(Error::validation(format!("no {a} features; run the `extract` step first")));
            }
            stores.insert(a, FeatureStore::load(&path)?);
        }
        Ok(stores)
    }

    /// Pick `condition` images per concept and compute every concept's
    /// eigenspectrum for every attribute.
    pub fn diversity(&self) -> Result<Selection> {
        self.pool.install(|| {
            let n = self.cfg.condition;
            let partition = self.partition(n)?;
            let stores = self.load_stores()?;
            let mut selection = Selection {
                condition: n,
                attributes: self.cfg.attributes.clone(),
                concepts: Vec::new(),
                dropped: BTreeMap::new(),
            };
            for (lemma, label, records) in partition.concepts() {
                let usable: Vec<String> = records
                    .iter()
                    .filter(|r| stores.values().all(|s| s.contains(&r.image_id)))
                    .map(|r| r.image_id.clone())
                    .collect();
                if usable.len() < n {
                    selection.dropped.insert(lemma.clone(), usable.len());
                    continue;
                }
                selection.concepts.push(SelectedConcept {
                    lemma: lemma.clone(),
                    class_label: label,
                    rating: partition.ratings[lemma],
                    images: usable[..n].to_vec(),
                });
            }
            let jobs: Vec<(&SelectedConcept, Attribute)> = selection
                .concepts
                .iter()
                .flat_map(|c| self.cfg.attributes.iter().map(move |&a| (c, a)))
                .collect();
            let spectra: Vec<EigenSpectrum> = jobs
                .par_iter()
                .map(|(c, a)| {
                    let vectors: Vec<&[f64]> =
                        c.images.iter().map(|id| stores[a].get(id).expect("selected").values.as_slice()).collect();
                    eigenspectrum(&similarity_matrix(&c.lemma, *a, &vectors)?)
                })
                .collect::<Result<_>>()?;
            let dir = self.condition_dir();
            mkdirs(&dir)?;
            write_json(&dir.join("selection.json"), &selection)?;
            corpus::write_jsonl(&dir.join("spectra.jsonl"), &spectra)?;
            log::info!(
                "diversity: {} abstract and {} concrete concepts at N={n}",
                selection.count(ClassLabel::Abstract),
                selection.count(ClassLabel::Concrete)
            );
            Ok(selection)
        })
    }

    fn load_diversity(&self) -> Result<(Selection, Vec<EigenSpectrum>)> {
        let dir = self.condition_dir();
        let selection: Selection = read_json(&dir.join("selection.json"), "diversity")?;
        let f = fs::File::open(dir.join("spectra.jsonl")).map_err(|e| Error::io(dir.join("spectra.jsonl"), e))?;
        let spectra = corpus::read_jsonl(std::io::BufReader::new(f), "spectra.jsonl")?;
        Ok((selection, spectra))
    }

    /// Feature sets evaluated by `classify` and `regress`: every attribute
    /// alone, then the seven basic attributes combined when all are present.
    pub fn feature_sets(&self) -> Vec<(String, Vec<Attribute>)> {
        let mut sets: Vec<(String, Vec<Attribute>)> =
            self.cfg.attributes.iter().map(|a| (a.name().to_string(), vec![*a])).collect();
        if Attribute::BASIC.iter().all(|a| self.cfg.wants(*a)) {
            sets.push((COMBINED_BASIC.to_string(), Attribute::BASIC.to_vec()));
        }
        sets
    }

    fn samples(&self, selection: &Selection, spectra: &[EigenSpectrum], order: &[Attribute]) -> Result<Vec<ConceptSample>> {
        let mut by_concept: BTreeMap<&str, BTreeMap<Attribute, EigenSpectrum>> = BTreeMap::new();
        for s in spectra {
            by_concept.entry(s.lemma.as_str()).or_default().insert(s.attribute, s.clone());
        }
        let empty = BTreeMap::new();
        selection
            .concepts
            .iter()
            .map(|c| {
                combine(
                    &c.lemma,
                    Some(c.class_label),
                    Some(c.rating),
                    by_concept.get(c.lemma.as_str()).unwrap_or(&empty),
                    order,
                )
            })
            .collect()
    }

    fn grid(&self, kind: ModelKind) -> Vec<ModelParams> {
        match kind {
            ModelKind::RandomForest => self.cfg.classify.forest_grid.iter().map(|p| ModelParams::RandomForest(*p)).collect(),
            ModelKind::LogisticRegression => {
                self.cfg.classify.logistic_grid.iter().map(|p| ModelParams::LogisticRegression(*p)).collect()
            }
            ModelKind::GradientBoostedTrees => vec![ModelParams::GradientBoostedTrees(self.cfg.regress.gbt)],
        }
    }

    /// Abstract vs. concrete classification for every feature set and model
    /// family, each tuned by grid search under k-fold cross-validation.
    pub fn classify(&self) -> Result<Vec<ClassifyRow>> {
        self.pool.install(|| {
            let (selection, spectra) = self.load_diversity()?;
            let k = self.cfg.classify.folds;
            let (na, nc) = (selection.count(ClassLabel::Abstract), selection.count(ClassLabel::Concrete));
            if na < k || nc < k {
                return Err(Error::validation(format!(
                    "condition {} leaves {na} abstract and {nc} concrete concepts; {k}-fold cross-validation needs {k} per class",
                    self.cfg.condition
                )));
            }
            let mut rows = Vec::new();
            for (name, order) in self.feature_sets() {
                let samples = self.samples(&selection, &spectra, &order)?;
                for &kind in &self.cfg.classify.models {
                    let grid = self.grid(kind);
                    let report = if grid.len() == 1 {
                        kfold_classify(&samples, &ModelSpec::new(grid[0], self.cfg.seed), k, self.cfg.seed)?
                    } else {
                        grid_search(&samples, &grid, k, self.cfg.seed)?.1
                    };
                    log::info!("classify {name} / {kind:?}: weighted F1 {:.3}", report.weighted_f1);
                    rows.push(ClassifyRow {
                        feature_set: name.clone(),
                        model: kind,
                        report,
                    });
                }
            }
            write_json(&self.report_path("classify", "json"), &self.envelope(&rows))?;
            self.classify_plots(&rows)?;
            Ok(rows)
        })
    }

    fn classify_plots(&self, rows: &[ClassifyRow]) -> Result<()> {
        let sets: Vec<String> = self.feature_sets().into_iter().map(|s| s.0).collect();
        let series: Vec<(String, Vec<f64>)> = self
            .cfg
            .classify
            .models
            .iter()
            .map(|m| {
                let vals = sets
                    .iter()
                    .map(|s| {
                        rows.iter()
                            .find(|r| &r.feature_set == s && r.model == *m)
                            .map_or(0.0, |r| r.report.weighted_f1)
                    })
                    .collect();
                (format!("{m:?}"), vals)
            })
            .collect();
        let title = format!("Weighted F1, {} images per concept", self.cfg.condition);
        write_text(&self.report_path("classify", "svg"), &plots::bar_chart(&title, &sets, &series, 1.0))?;

        let best_model = self.cfg.classify.models[0];
        let classwise: Vec<(String, Vec<f64>)> = [ClassLabel::Abstract, ClassLabel::Concrete]
            .iter()
            .map(|c| {
                let vals = sets
                    .iter()
                    .map(|s| {
                        rows.iter()
                            .find(|r| &r.feature_set == s && r.model == best_model)
                            .map_or(0.0, |r| r.report.per_class_f1.get(c).copied().unwrap_or(0.0))
                    })
                    .collect();
                (c.as_str().to_string(), vals)
            })
            .collect();
        let title = format!("Class-wise F1 ({best_model:?}), {} images per concept", self.cfg.condition);
        write_text(&self.report_path("classwise", "svg"), &plots::bar_chart(&title, &sets, &classwise, 1.0))
    }

    /// Concreteness-rating regression for every feature set.
    pub fn regress(&self) -> Result<Vec<RegressRow>> {
        self.pool.install(|| {
            let (selection, spectra) = self.load_diversity()?;
            let mut rows = Vec::new();
            for (name, order) in self.feature_sets() {
                let samples = self.samples(&selection, &spectra, &order)?;
                let report = mc_regress(
                    &samples,
                    &self.cfg.regress.gbt,
                    self.cfg.regress.splits,
                    self.cfg.regress.train_ratio,
                    self.cfg.seed,
                )?;
                log::info!("regress {name}: rho {:.3}, rmse {:.3}", report.spearman_rho, report.rmse);
                rows.push(RegressRow {
                    feature_set: name,
                    report,
                });
            }
            write_json(&self.report_path("regress", "json"), &self.envelope(&rows))?;
            Ok(rows)
        })
    }

    /// Cross-concept nearest neighbours for every attribute over the selected
    /// images.
    pub fn neighbors(&self) -> Result<Vec<NeighborReport>> {
        self.pool.install(|| {
            let (selection, _) = self.load_diversity()?;
            let stores = self.load_stores()?;
            let mut concept_of = BTreeMap::new();
            let mut class_of = BTreeMap::new();
            for c in &selection.concepts {
                class_of.insert(c.lemma.clone(), c.class_label);
                for id in &c.images {
                    concept_of.insert(id.clone(), c.lemma.clone());
                }
            }
            let topn = self.cfg.topn();
            let mut reports = Vec::new();
            for &a in &self.cfg.attributes {
                let items = concept_of
                    .keys()
                    .map(|id| (id.clone(), stores[&a].get(id).expect("selected").values.clone()))
                    .collect();
                let index = NeighborIndex::new(items)?;
                reports.push(neighbor_report(a, &index, &concept_of, &class_of, topn)?);
            }
            write_json(&self.report_path("neighbors", "json"), &self.envelope(&reports))?;
            let frac: Vec<_> = reports.iter().map(|r| (r.attribute, &r.per_class)).collect();
            let mut csv = Vec::new();
            write_class_table(&mut csv, &frac)?;
            write_text(&self.report_path("neighbors", "csv"), &String::from_utf8_lossy(&csv))?;
            let sims: Vec<_> = reports.iter().map(|r| (r.attribute, &r.mean_topk_similarity)).collect();
            let mut csv = Vec::new();
            write_class_table(&mut csv, &sims)?;
            write_text(&self.report_path("similarity", "csv"), &String::from_utf8_lossy(&csv))?;

            let rows: Vec<String> = reports.iter().map(|r| r.attribute.name().to_string()).collect();
            let cols = vec!["A".to_string(), "C".to_string()];
            let values: Vec<Vec<f64>> = reports
                .iter()
                .map(|r| {
                    [ClassLabel::Abstract, ClassLabel::Concrete]
                        .iter()
                        .map(|c| r.per_class.get(c).copied().unwrap_or(0.0))
                        .collect()
                })
                .collect();
            let title = format!("Same-concept neighbours (%), top {topn}");
            write_text(&self.report_path("neighbors", "svg"), &plots::heatmap(&title, &rows, &cols, &values, 100.0))?;
            Ok(reports)
        })
    }

    /// Corpus statistics: concept availability per condition, detection
    /// coverage, extraction failures and, given a ratings table, annotator
    /// agreement.
    pub fn stats(&self, agreement: Option<&Path>) -> Result<StatsReport> {
        self.pool.install(|| {
            let all = self.partition(1)?;
            let availability = self
                .cfg
                .corpus
                .stats_conditions
                .iter()
                .map(|&n| {
                    let (a, c) = all.counts_with_at_least(n);
                    AvailabilityRow {
                        condition: n,
                        abstract_concepts: a,
                        concrete_concepts: c,
                    }
                })
                .collect();
            let at_condition = self.partition(self.cfg.condition)?;
            let detection_availability = match &self.cfg.objects.detections {
                Some(path) if self.cfg.wants(Attribute::Yolo) || self.cfg.wants(Attribute::ObjectLoc) => {
                    let dets = ingest_detections(path, self.cfg.objects.class_count)?;
                    let ids: Vec<(ClassLabel, Vec<String>)> = at_condition
                        .concepts()
                        .map(|(_, l, recs)| (l, recs.iter().map(|r| r.image_id.clone()).collect()))
                        .collect();
                    Some(availability_stats(ids.iter().map(|(l, v)| (*l, v.as_slice())), &dets))
                }
                _ => None,
            };
            let failures_path = self.dir.join("features").join("failures.jsonl");
            let extraction_failures = match fs::read_to_string(&failures_path) {
                Ok(t) => t.lines().filter(|l| !l.trim().is_empty()).count(),
                Err(_) => 0,
            };
            let krippendorff_alpha = match agreement {
                Some(p) => Some(krippendorff_alpha(&AgreementTable::load(p)?)?),
                None => None,
            };
            let (selected_abstract, selected_concrete) = match read_json::<Selection>(
                &self.condition_dir().join("selection.json"),
                "diversity",
            ) {
                Ok(s) => (s.count(ClassLabel::Abstract), s.count(ClassLabel::Concrete)),
                Err(_) => at_condition.counts_with_at_least(self.cfg.condition),
            };
            let report = StatsReport {
                partition: at_condition.report,
                availability,
                selected_abstract,
                selected_concrete,
                detection_availability,
                extraction_failures,
                krippendorff_alpha,
            };
            write_json(&self.dir.join("reports").join("stats.json"), &self.envelope(&report))?;
            Ok(report)
        })
    }

    /// Run every step in order and write `summary.md`.
    pub fn report(&self, agreement: Option<&Path>) -> Result<PathBuf> {
        self.ingest()?;
        if self.cfg.wants(Attribute::Surf) && !self.codebook_path().exists() {
            self.codebook()?;
        }
        self.extract()?;
        let selection = self.diversity()?;
        let classify = self.classify()?;
        let regress = self.regress()?;
        let neighbors = self.neighbors()?;
        let stats = self.stats(agreement)?;

        let mut md = String::new();
        md.push_str(&format!(
            "# Visual diversity report\n\nConfiguration `{}`, seed {}, {} images per concept: {} abstract and {} concrete concepts.\n\n",
            self.hash,
            self.cfg.seed,
            self.cfg.condition,
            selection.count(ClassLabel::Abstract),
            selection.count(ClassLabel::Concrete)
        ));
        md.push_str("## Classification (weighted F1)\n\n| Feature set | Model | Weighted F1 | F1 abstract | F1 concrete |\n|---|---|---|---|---|\n");
        for r in &classify {
            let f = |c| r.report.per_class_f1.get(&c).copied().unwrap_or(0.0);
            md.push_str(&format!(
                "| {} | {:?} | {:.3} | {:.3} | {:.3} |\n",
                r.feature_set,
                r.model,
                r.report.weighted_f1,
                f(ClassLabel::Abstract),
                f(ClassLabel::Concrete)
            ));
        }
        md.push_str("\n## Concreteness regression\n\n| Feature set | Spearman rho | RMSE |\n|---|---|---|\n");
        for r in &regress {
            let rho = if r.report.rho_undefined {
                "undefined".to_string()
            } else {
                format!("{:.3}", r.report.spearman_rho)
            };
            md.push_str(&format!("| {} | {rho} | {:.3} |\n", r.feature_set, r.report.rmse));
        }
        md.push_str(&format!(
            "\n## Same-concept neighbours (top {})\n\n| Attribute | A (%) | C (%) | mean sim A | mean sim C |\n|---|---|---|---|---|\n",
            self.cfg.topn()
        ));
        for r in &neighbors {
            let g = |m: &BTreeMap<ClassLabel, f64>, c| m.get(&c).copied().unwrap_or(0.0);
            md.push_str(&format!(
                "| {} | {:.2} | {:.2} | {:.3} | {:.3} |\n",
                r.attribute,
                g(&r.per_class, ClassLabel::Abstract),
                g(&r.per_class, ClassLabel::Concrete),
                g(&r.mean_topk_similarity, ClassLabel::Abstract),
                g(&r.mean_topk_similarity, ClassLabel::Concrete)
            ));
        }
        md.push_str("\n## Concepts available per condition\n\n| Images per concept | Abstract | Concrete |\n|---|---|---|\n");
        for a in &stats.availability {
            md.push_str(&format!("| {} | {} | {} |\n", a.condition, a.abstract_concepts, a.concrete_concepts));
        }
        if let Some(d) = stats.detection_availability {
            md.push_str(&format!(
                "\nImages with at least one detected object: {:.1}% (abstract), {:.1}% (concrete).\n",
                d.abstract_pct, d.concrete_pct
            ));
        }
        if let Some(a) = stats.krippendorff_alpha {
            md.push_str(&format!("\nKrippendorff's alpha: {a:.3}\n"));
        }
        let path = self.dir.join("summary.md");
        write_text(&path, &md)?;
        Ok(path)
    }
}
