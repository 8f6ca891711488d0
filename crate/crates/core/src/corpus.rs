//! Concreteness norms, image manifests, exact-duplicate removal and the
//! abstract/concrete partition of concepts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pixels::PixelGrid;

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 5.0;

/// Default concreteness bands for highly abstract / highly concrete nouns.
pub const ABSTRACT_BAND: Band = Band { lo: 1.07, hi: 1.96 };
pub const CONCRETE_BAND: Band = Band { lo: 4.85, hi: 5.00 };

/// Images smaller than this on either side are filtered out.
pub const DEFAULT_MIN_SIDE: u32 = 256;
/// Concepts with fewer kept images are dropped from the partition.
pub const DEFAULT_MIN_IMAGES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Abstract,
    Concrete,
    Excluded,
}

impl ClassLabel {
    /// Short column header used in tables (`A` / `C`).
    pub fn short(self) -> &'static str {
        match self {
            ClassLabel::Abstract => "A",
            ClassLabel::Concrete => "C",
            ClassLabel::Excluded => "X",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Abstract => "abstract",
            ClassLabel::Concrete => "concrete",
            ClassLabel::Excluded => "excluded",
        }
    }
}

/// Closed rating interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, rating: f64) -> bool {
        rating >= self.lo && rating <= self.hi
    }

    fn overlaps(&self, other: &Band) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::validation(format!(
                "{name} band [{}, {}] is not a valid interval",
                self.lo, self.hi
            )));
        }
        if self.lo < MIN_RATING || self.hi > MAX_RATING {
            return Err(Error::validation(format!(
                "{name} band [{}, {}] lies outside [1, 5]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub lemma: String,
    pub rating: f64,
    pub class_label: ClassLabel,
}

/// Label a rating by band membership.
pub fn classify_rating(rating: f64, abstract_band: &Band, concrete_band: &Band) -> ClassLabel {
    if abstract_band.contains(rating) {
        ClassLabel::Abstract
    } else if concrete_band.contains(rating) {
        ClassLabel::Concrete
    } else {
        ClassLabel::Excluded
    }
}

#[derive(Deserialize)]
struct NormsRow {
    word: String,
    concreteness: f64,
}

/// Read a `word,concreteness` CSV and label every row. Input order is kept.
pub fn load_norms(path: &Path, abstract_band: Band, concrete_band: Band) -> Result<Vec<ConceptEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_norms_from_reader(file, &path.display().to_string(), abstract_band, concrete_band)
}

pub fn load_norms_from_reader<R: Read>(
    reader: R,
    source_name: &str,
    abstract_band: Band,
    concrete_band: Band,
) -> Result<Vec<ConceptEntry>> {
    abstract_band.validate("abstract")?;
    concrete_band.validate("concrete")?;
    if abstract_band.overlaps(&concrete_band) {
        return Err(Error::validation("abstract and concrete bands overlap"));
    }

    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("word") || headers.get(1) != Some("concreteness") {
        return Err(Error::parse(
            source_name,
            1,
            format!("expected header `word,concreteness`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut out = Vec::new();
    for result in rdr.deserialize::<NormsRow>() {
        let row = result.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source_name, line, e.to_string())
        })?;
        let line = out.len() + 2;
        if row.word.is_empty() {
            return Err(Error::parse(source_name, line, "empty word"));
        }
        if !(MIN_RATING..=MAX_RATING).contains(&row.concreteness) {
            return Err(Error::validation(format!(
                "{source_name}:{line}: rating {} for `{}` outside [1, 5]",
                row.concreteness, row.word
            )));
        }
        out.push(ConceptEntry {
            lemma: row.word.to_lowercase(),
            class_label: classify_rating(row.concreteness, &abstract_band, &concrete_band),
            rating: row.concreteness,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetTag {
    #[serde(alias = "bing", alias = "BING")]
    Bing,
    #[serde(alias = "yfcc", alias = "Yfcc")]
    YFCC,
    #[serde(alias = "other", alias = "OTHER")]
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub lemma: String,
    pub dataset_tag: DatasetTag,
    #[serde(rename = "path")]
    pub source_path: PathBuf,
    pub width: u32,
    pub height: u32,
}

/// One line of a rejects report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub image_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub records: Vec<ImageRecord>,
    pub per_concept_cap: usize,
}

impl Manifest {
    /// Validate id uniqueness and the per-concept cap.
    pub fn new(records: Vec<ImageRecord>, per_concept_cap: usize) -> Result<Self> {
        if per_concept_cap == 0 {
            return Err(Error::validation("per-concept cap must be positive"));
        }
        let mut seen = HashSet::new();
        let mut per_concept: HashMap<&str, usize> = HashMap::new();
        for r in &records {
            if !seen.insert(r.image_id.as_str()) {
                return Err(Error::validation(format!("duplicate image_id `{}`", r.image_id)));
            }
            let n = per_concept.entry(r.lemma.as_str()).or_default();
            *n += 1;
            if *n > per_concept_cap {
                return Err(Error::validation(format!(
                    "concept `{}` exceeds the cap of {per_concept_cap} images",
                    r.lemma
                )));
            }
        }
        Ok(Self {
            records,
            per_concept_cap,
        })
    }

    /// Read manifest records from JSON Lines. Relative image paths are
    /// resolved against the manifest's directory.
    pub fn read_records(path: &Path) -> Result<Vec<ImageRecord>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut records: Vec<ImageRecord> =
            read_jsonl(BufReader::new(file), &path.display().to_string())?;
        for r in &mut records {
            if r.source_path.is_relative() {
                r.source_path = base.join(&r.source_path);
            }
        }
        Ok(records)
    }

    /// Drop undersized images and keep at most `per_concept_cap` per concept
    /// (first in manifest order). Returns the manifest and the rejects.
    pub fn filtered(records: Vec<ImageRecord>, min_side: u32, per_concept_cap: usize) -> Result<(Self, Vec<Reject>)> {
        let mut rejects = Vec::new();
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut kept = Vec::new();
        for r in records {
            if r.width < min_side || r.height < min_side {
                rejects.push(Reject {
                    image_id: r.image_id,
                    reason: format!("smaller than {min_side}x{min_side}"),
                });
                continue;
            }
            let n = counts.entry(r.lemma.clone()).or_default();
            if *n >= per_concept_cap {
                rejects.push(Reject {
                    image_id: r.image_id,
                    reason: format!("over per-concept cap {per_concept_cap}"),
                });
                continue;
            }
            *n += 1;
            kept.push(r);
        }
        Ok((Self::new(kept, per_concept_cap)?, rejects))
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        write_jsonl(path, &self.records)
    }
}

/// Parse JSON Lines, skipping blank lines; errors carry the 1-based line.
pub fn read_jsonl<T: serde::de::DeserializeOwned, R: BufRead>(reader: R, source_name: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default)]
pub struct DedupOutcome {
    pub kept: Vec<ImageRecord>,
    /// Image ids dropped as exact duplicates of an earlier image.
    pub dropped: Vec<String>,
    /// Undecodable images.
    pub rejects: Vec<Reject>,
}

/// Remove exact pixel duplicates within each concept; the first occurrence
/// wins. Two images are duplicates when their decoded RGB buffers (and
/// dimensions) are byte-for-byte equal.
///
/// `load` decodes a record; it is called in parallel.
pub fn dedup_exact<F>(records: &[ImageRecord], load: F) -> DedupOutcome
where
    F: Fn(&ImageRecord) -> Result<PixelGrid> + Sync,
{
    let digests: Vec<Result<[u8; 32]>> = records
        .par_iter()
        .map(|r| load(r).map(|img| pixel_digest(&img)))
        .collect();

    let mut out = DedupOutcome::default();
    // (lemma, digest) -> indices of kept records with that digest
    let mut seen: HashMap<(&str, [u8; 32]), Vec<usize>> = HashMap::new();
    for (idx, (record, digest)) in records.iter().zip(digests).enumerate() {
        let digest = match digest {
            Ok(d) => d,
            Err(e) => {
                log::warn!("skipping {}: {e}", record.image_id);
                out.rejects.push(Reject {
                    image_id: record.image_id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let slot = seen.entry((record.lemma.as_str(), digest)).or_default();
        // confirm byte equality rather than trusting the digest alone
        let is_dup = slot.iter().any(|&prev| match (load(&records[prev]), load(record)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        });
        if is_dup {
            out.dropped.push(record.image_id.clone());
        } else {
            slot.push(idx);
            out.kept.push(record.clone());
        }
    }
    out
}

fn pixel_digest(img: &PixelGrid) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((img.width() as u64).to_le_bytes());
    h.update((img.height() as u64).to_le_bytes());
    h.update((img.channels() as u64).to_le_bytes());
    h.update(img.as_bytes());
    h.finalize().into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// Manifest lemmas with no entry in the norms.
    pub unresolved: Vec<String>,
    /// Concepts whose rating falls between the bands.
    pub excluded: Vec<String>,
    pub dropped_too_few_abstract: usize,
    pub dropped_too_few_concrete: usize,
}

/// Concepts grouped by class, each with its records in manifest order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partition {
    pub abstract_concepts: BTreeMap<String, Vec<ImageRecord>>,
    pub concrete_concepts: BTreeMap<String, Vec<ImageRecord>>,
    pub ratings: BTreeMap<String, f64>,
    pub report: PartitionReport,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.abstract_concepts.len() + self.concrete_concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_of(&self, lemma: &str) -> Option<ClassLabel> {
        if self.abstract_concepts.contains_key(lemma) {
            Some(ClassLabel::Abstract)
        } else if self.concrete_concepts.contains_key(lemma) {
            Some(ClassLabel::Concrete)
        } else {
            None
        }
    }

    /// All concepts with their labels, abstract first, lemmas sorted.
    pub fn concepts(&self) -> impl Iterator<Item = (&String, ClassLabel, &Vec<ImageRecord>)> {
        self.abstract_concepts
            .iter()
            .map(|(k, v)| (k, ClassLabel::Abstract, v))
            .chain(self.concrete_concepts.iter().map(|(k, v)| (k, ClassLabel::Concrete, v)))
    }

    /// Number of concepts per class having at least `n` images.
    pub fn counts_with_at_least(&self, n: usize) -> (usize, usize) {
        let a = self.abstract_concepts.values().filter(|v| v.len() >= n).count();
        let c = self.concrete_concepts.values().filter(|v| v.len() >= n).count();
        (a, c)
    }
}

/// Group manifest records by concept and class, dropping excluded or
/// unresolved lemmas and concepts with fewer than `min_images` images.
pub fn partition_manifest(manifest: &Manifest, norms: &[ConceptEntry], min_images: usize) -> Partition {
    let lookup: HashMap<&str, &ConceptEntry> = norms.iter().map(|e| (e.lemma.as_str(), e)).collect();
    let mut groups: BTreeMap<&str, Vec<ImageRecord>> = BTreeMap::new();
    for r in &manifest.records {
        groups.entry(r.lemma.as_str()).or_default().push(r.clone());
    }

    let mut p = Partition::default();
    for (lemma, records) in groups {
        let Some(entry) = lookup.get(lemma.to_lowercase().as_str()) else {
            p.report.unresolved.push(lemma.to_string());
            continue;
        };
        let target = match entry.class_label {
            ClassLabel::Excluded => {
                p.report.excluded.push(lemma.to_string());
                continue;
            }
            ClassLabel::Abstract => {
                if records.len() < min_images {
                    p.report.dropped_too_few_abstract += 1;
                    continue;
                }
                &mut p.abstract_concepts
            }
            ClassLabel::Concrete => {
                if records.len() < min_images {
                    p.report.dropped_too_few_concrete += 1;
                    continue;
                }
                &mut p.concrete_concepts
            }
        };
        target.insert(lemma.to_string(), records);
        p.ratings.insert(lemma.to_string(), entry.rating);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(csv: &str) -> Result<Vec<ConceptEntry>> {
        load_norms_from_reader(csv.as_bytes(), "norms.csv", ABSTRACT_BAND, CONCRETE_BAND)
    }

    fn rec(id: &str, lemma: &str) -> ImageRecord {
        ImageRecord {
            image_id: id.into(),
            lemma: lemma.into(),
            dataset_tag: DatasetTag::Bing,
            source_path: PathBuf::from(format!("{id}.png")),
            width: 256,
            height: 256,
        }
    }

    #[test]
    fn band_labels() {
        let e = norms("word,concreteness\nallegiance,1.50\nbanana,5.00\nidea,3.00\n").unwrap();
        let labels: Vec<_> = e.iter().map(|c| (c.lemma.as_str(), c.class_label)).collect();
        assert_eq!(
            labels,
            vec![
                ("allegiance", ClassLabel::Abstract),
                ("banana", ClassLabel::Concrete),
                ("idea", ClassLabel::Excluded),
            ]
        );
    }

    #[test]
    fn band_edges_are_inclusive() {
        let e = norms("word,concreteness\na,1.07\nb,1.96\nc,4.85\nd,1.97\n").unwrap();
        let labels: Vec<_> = e.iter().map(|c| c.class_label).collect();
        assert_eq!(
            labels,
            vec![ClassLabel::Abstract, ClassLabel::Abstract, ClassLabel::Concrete, ClassLabel::Excluded]
        );
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = norms("word,concreteness\nok,2.0\nbad,notanumber\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_rating_is_validation_error() {
        assert!(matches!(norms("word,concreteness\nx,5.5\n"), Err(Error::Validation(_))));
        assert!(matches!(norms("word,concreteness\nx,0.9\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn overlapping_bands_rejected() {
        let r = load_norms_from_reader(
            "word,concreteness\n".as_bytes(),
            "n",
            Band::new(1.0, 3.0),
            Band::new(2.5, 5.0),
        );
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(norms("lemma,score\nx,2\n"), Err(Error::Parse { line: 1, .. })));
    }

    fn fake_loader(pixels: HashMap<String, Vec<u8>>) -> impl Fn(&ImageRecord) -> Result<PixelGrid> + Sync {
        move |r| match pixels.get(&r.image_id) {
            Some(p) => PixelGrid::from_rgb(p.len() / 3, 1, p.clone()),
            None => Err(Error::Decode {
                path: r.source_path.clone(),
                message: "missing".into(),
            }),
        }
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let recs = vec![rec("1", "x"), rec("2", "x"), rec("3", "x")];
        let px = HashMap::from([
            ("1".to_string(), vec![1, 2, 3]),
            ("2".to_string(), vec![9, 9, 9]),
            ("3".to_string(), vec![1, 2, 3]),
        ]);
        let out = dedup_exact(&recs, fake_loader(px));
        let kept: Vec<_> = out.kept.iter().map(|r| r.image_id.as_str()).collect();
        assert_eq!(kept, vec!["1", "2"]);
        assert_eq!(out.dropped, vec!["3".to_string()]);
    }

    #[test]
    fn dedup_is_per_concept_and_reports_undecodable() {
        let recs = vec![rec("1", "x"), rec("2", "y"), rec("3", "y")];
        let px = HashMap::from([("1".to_string(), vec![1, 2, 3]), ("2".to_string(), vec![1, 2, 3])]);
        let out = dedup_exact(&recs, fake_loader(px));
        assert_eq!(out.kept.len(), 2);
        assert!(out.dropped.is_empty());
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].image_id, "3");
    }

    #[test]
    fn dedup_keeps_different_resolutions() {
        let recs = vec![rec("1", "x"), rec("2", "x")];
        let px = HashMap::from([("1".to_string(), vec![5; 6]), ("2".to_string(), vec![5; 12])]);
        let out = dedup_exact(&recs, fake_loader(px));
        assert_eq!(out.kept.len(), 2);
    }

    #[test]
    fn partition_filters_excluded_and_small() {
        let n = norms("word,concreteness\nbanana,5.0\nidea,3.0\nhope,1.2\n").unwrap();
        let recs = vec![rec("1", "banana"), rec("2", "idea"), rec("3", "hope"), rec("4", "ghost")];
        let m = Manifest::new(recs, 25).unwrap();
        let p = partition_manifest(&m, &n, 1);
        assert_eq!(p.len(), 2);
        assert_eq!(p.class_of("banana"), Some(ClassLabel::Concrete));
        assert_eq!(p.report.excluded, vec!["idea".to_string()]);
        assert_eq!(p.report.unresolved, vec!["ghost".to_string()]);

        let p2 = partition_manifest(&m, &n, 2);
        assert!(p2.is_empty());
        assert_eq!(p2.report.dropped_too_few_abstract, 1);
        assert_eq!(p2.report.dropped_too_few_concrete, 1);
    }

    #[test]
    fn two_concepts_one_excluded() {
        let n = norms("word,concreteness\nbanana,5.0\nidea,3.0\n").unwrap();
        let m = Manifest::new(vec![rec("1", "banana"), rec("2", "idea")], 25).unwrap();
        assert_eq!(partition_manifest(&m, &n, 1).len(), 1);
    }

    #[test]
    fn empty_manifest_gives_empty_partition() {
        let m = Manifest::new(vec![], 25).unwrap();
        assert!(partition_manifest(&m, &[], 25).is_empty());
    }

    #[test]
    fn manifest_rejects_duplicate_ids_and_cap() {
        assert!(Manifest::new(vec![rec("1", "a"), rec("1", "b")], 5).is_err());
        assert!(Manifest::new(vec![rec("1", "a"), rec("2", "a")], 1).is_err());
    }

    #[test]
    fn filtering_applies_size_and_cap() {
        let mut small = rec("s", "a");
        small.width = 100;
        let recs = vec![small, rec("1", "a"), rec("2", "a"), rec("3", "a")];
        let (m, rejects) = Manifest::filtered(recs, 256, 2).unwrap();
        let ids: Vec<_> = m.records.iter().map(|r| r.image_id.as_str()).collect();
        assert_eq!(ids, vec!["1", "2"]);
        assert_eq!(rejects.len(), 2);
    }

    #[test]
    fn manifest_json_shape() {
        let line = r#"{"image_id":"b1","lemma":"banana","dataset_tag":"Bing","path":"img/b1.jpg","width":300,"height":400}"#;
        let r: ImageRecord = serde_json::from_str(line).unwrap();
        assert_eq!(r.dataset_tag, DatasetTag::Bing);
        assert_eq!(serde_json::to_string(&r).unwrap(), line);
        let y: ImageRecord = serde_json::from_str(&line.replace("Bing", "yfcc")).unwrap();
        assert_eq!(y.dataset_tag, DatasetTag::YFCC);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn labeling_is_order_independent(ratings in proptest::collection::vec(1.0f64..=5.0, 1..40), seed in any::<u64>()) {
                let mut rows: Vec<(String, f64)> = ratings.iter().enumerate().map(|(i, r)| (format!("w{i}"), *r)).collect();
                let to_csv = |rows: &[(String, f64)]| {
                    let mut s = String::from("word,concreteness\n");
                    for (w, r) in rows { s.push_str(&format!("{w},{r}\n")); }
                    s
                };
                let a: BTreeMap<_, _> = norms(&to_csv(&rows)).unwrap().into_iter().map(|e| (e.lemma, e.class_label)).collect();
                // deterministic shuffle
                let n = rows.len();
                for i in (1..n).rev() {
                    let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % (i as u64 + 1)) as usize;
                    rows.swap(i, j);
                }
                let b: BTreeMap<_, _> = norms(&to_csv(&rows)).unwrap().into_iter().map(|e| (e.lemma, e.class_label)).collect();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn dedup_is_idempotent(vals in proptest::collection::vec((0u8..3, 0u8..4), 0..20)) {
                let recs: Vec<_> = vals.iter().enumerate().map(|(i, (c, _))| rec(&i.to_string(), &format!("c{c}"))).collect();
                let px: HashMap<String, Vec<u8>> = vals.iter().enumerate().map(|(i, (_, v))| (i.to_string(), vec![*v; 3])).collect();
                let loader = fake_loader(px);
                let once = dedup_exact(&recs, &loader);
                let twice = dedup_exact(&once.kept, &loader);
                prop_assert_eq!(&once.kept, &twice.kept);
                prop_assert!(twice.dropped.is_empty());
            }

            #[test]
            fn partition_never_assigns_both(ratings in proptest::collection::vec(1.0f64..=5.0, 0..30)) {
                let norms_v: Vec<ConceptEntry> = ratings.iter().enumerate().map(|(i, r)| ConceptEntry {
                    lemma: format!("w{i}"), rating: *r, class_label: classify_rating(*r, &ABSTRACT_BAND, &CONCRETE_BAND)
                }).collect();
                let recs: Vec<_> = (0..ratings.len()).map(|i| rec(&i.to_string(), &format!("w{i}"))).collect();
                let p = partition_manifest(&Manifest::new(recs, 5).unwrap(), &norms_v, 1);
                for k in p.abstract_concepts.keys() {
                    prop_assert!(!p.concrete_concepts.contains_key(k));
                }
            }
        }
    }
}
