//! Exact cosine nearest neighbours across the whole corpus, and how often an
//! image's neighbours belong to its own concept.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::features::{Attribute, FeatureStore};

/// Neighbour count used for the average-similarity table.
pub const SIMILARITY_TOPN: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub image_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub neighbors: Vec<Neighbor>,
    /// The query vector was all zero, so every similarity is 0.
    pub zero_query: bool,
}

/// All vectors of one attribute, sorted by image id.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    norms: Vec<f64>,
    position: BTreeMap<String, usize>,
}

impl NeighborIndex {
    pub fn new(mut items: Vec<(String, Vec<f64>)>) -> Result<Self> {
        items.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = items.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::validation(format!("duplicate image id `{}`", w[0].0)));
        }
        if let Some(first) = items.first() {
            let d = first.1.len();
            if let Some(bad) = items.iter().find(|i| i.1.len() != d) {
                return Err(Error::validation(format!(
                    "`{}` has dim {} but `{}` has {d}",
                    bad.0,
                    bad.1.len(),
                    first.0
                )));
            }
        }
        let (ids, vectors): (Vec<String>, Vec<Vec<f64>>) = items.into_iter().unzip();
        let norms = vectors.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let position = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self {
            ids,
            vectors,
            norms,
            position,
        })
    }

    pub fn from_store(store: &FeatureStore) -> Result<Self> {
        Self::new(store.iter().map(|f| (f.image_id.clone(), f.values.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn similarity(&self, a: usize, b: usize) -> f64 {
        if self.norms[a] == 0.0 || self.norms[b] == 0.0 {
            return 0.0;
        }
        let dot: f64 = self.vectors[a].iter().zip(&self.vectors[b]).map(|(x, y)| x * y).sum();
        (dot / (self.norms[a] * self.norms[b])).clamp(-1.0, 1.0)
    }

    /// Top `topn` other images by cosine similarity, highest first; equal
    /// similarities are ordered by image id.
    pub fn query(&self, image_id: &str, topn: usize) -> Result<QueryResult> {
        let &q = self
            .position
            .get(image_id)
            .ok_or_else(|| Error::validation(format!("query image `{image_id}` is not in the index")))?;
        if topn + 1 > self.len() {
            return Err(Error::validation(format!(
                "top-{topn} neighbours need at least {} images, index has {}",
                topn + 1,
                self.len()
            )));
        }
        let mut scored: Vec<(f64, usize)> = (0..self.len()).filter(|&i| i != q).map(|i| (self.similarity(q, i), i)).collect();
        // ids are sorted, so index order is id order
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(topn);
        Ok(QueryResult {
            neighbors: scored
                .into_iter()
                .map(|(s, i)| Neighbor {
                    image_id: self.ids[i].clone(),
                    similarity: s,
                })
                .collect(),
            zero_query: self.norms[q] == 0.0,
        })
    }
}

pub fn nearest_neighbors(index: &NeighborIndex, query: &str, topn: usize) -> Result<QueryResult> {
    index.query(query, topn)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageNeighbors {
    pub lemma: String,
    pub neighbors: Vec<String>,
    pub similarities: Vec<f64>,
    /// Percentage of the top-N neighbours sharing the query's concept.
    pub same_concept_fraction: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_query: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborReport {
    pub attribute: Attribute,
    pub topn: usize,
    pub per_image: BTreeMap<String, ImageNeighbors>,
    /// Mean image-level percentage per concept.
    pub per_concept: BTreeMap<String, f64>,
    /// Mean concept-level percentage per class.
    pub per_class: BTreeMap<ClassLabel, f64>,
    /// Mean cosine over each image's closest neighbours (at most
    /// [`SIMILARITY_TOPN`]), averaged per class.
    pub mean_topk_similarity: BTreeMap<ClassLabel, f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Same-concept percentages and class-level similarity summaries for one
/// attribute. `concept_of` maps image id to lemma; `class_of` maps lemma to
/// class, and concepts without an abstract/concrete class only appear at the
/// image and concept levels.
pub fn neighbor_report(
    attribute: Attribute,
    index: &NeighborIndex,
    concept_of: &BTreeMap<String, String>,
    class_of: &BTreeMap<String, ClassLabel>,
    topn: usize,
) -> Result<NeighborReport> {
    if let Some(id) = index.ids().iter().find(|id| !concept_of.contains_key(*id)) {
        return Err(Error::validation(format!("image `{id}` has no concept")));
    }
    let sim_topn = SIMILARITY_TOPN.min(index.len().saturating_sub(1));
    let depth = topn.max(sim_topn);
    let rows: Vec<(String, ImageNeighbors, f64)> = index
        .ids()
        .par_iter()
        .map(|id| {
            let r = index.query(id, depth)?;
            let lemma = &concept_of[id];
            let top = &r.neighbors[..topn];
            let same = top.iter().filter(|n| &concept_of[&n.image_id] == lemma).count();
            let sim_mean = mean(&r.neighbors[..sim_topn].iter().map(|n| n.similarity).collect::<Vec<_>>());
            Ok((
                id.clone(),
                ImageNeighbors {
                    lemma: lemma.clone(),
                    neighbors: top.iter().map(|n| n.image_id.clone()).collect(),
                    similarities: top.iter().map(|n| n.similarity).collect(),
                    same_concept_fraction: if topn == 0 { 0.0 } else { 100.0 * same as f64 / topn as f64 },
                    zero_query: r.zero_query,
                },
                sim_mean,
            ))
        })
        .collect::<Result<_>>()?;

    let mut by_concept: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut sims_by_class: BTreeMap<ClassLabel, Vec<f64>> = BTreeMap::new();
    for (_, row, sim) in &rows {
        by_concept.entry(row.lemma.clone()).or_default().push(row.same_concept_fraction);
        if let Some(&c) = class_of.get(&row.lemma) {
            if c != ClassLabel::Excluded {
                sims_by_class.entry(c).or_default().push(*sim);
            }
        }
    }
    let per_concept: BTreeMap<String, f64> = by_concept.iter().map(|(k, v)| (k.clone(), mean(v))).collect();
    let mut frac_by_class: BTreeMap<ClassLabel, Vec<f64>> = BTreeMap::new();
    for (lemma, f) in &per_concept {
        if let Some(&c) = class_of.get(lemma) {
            if c != ClassLabel::Excluded {
                frac_by_class.entry(c).or_default().push(*f);
            }
        }
    }
    Ok(NeighborReport {
        attribute,
        topn,
        per_image: rows.into_iter().map(|(id, row, _)| (id, row)).collect(),
        per_concept,
        per_class: frac_by_class.iter().map(|(k, v)| (*k, mean(v))).collect(),
        mean_topk_similarity: sims_by_class.iter().map(|(k, v)| (*k, mean(v))).collect(),
    })
}

/// One row per attribute with abstract and concrete columns.
pub fn write_class_table<W: Write>(writer: W, rows: &[(Attribute, &BTreeMap<ClassLabel, f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["attribute", "A", "C"])?;
    for (attr, vals) in rows {
        let cell = |c: ClassLabel| vals.get(&c).map_or(String::new(), |v| format!("{v:.4}"));
        w.write_record([attr.name().to_string(), cell(ClassLabel::Abstract), cell(ClassLabel::Concrete)])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index(items: &[(&str, Vec<f64>)]) -> NeighborIndex {
        NeighborIndex::new(items.iter().map(|(i, v)| (i.to_string(), v.clone())).collect()).unwrap()
    }

    fn two_concepts(vecs: [Vec<f64>; 6]) -> (NeighborIndex, BTreeMap<String, String>, BTreeMap<String, ClassLabel>) {
        let ids = ["a1", "a2", "a3", "b1", "b2", "b3"];
        let idx = index(&ids.iter().zip(vecs).map(|(i, v)| (*i, v)).collect::<Vec<_>>());
        let concept = ids.iter().map(|i| (i.to_string(), i[..1].to_string())).collect();
        let class = [("a".to_string(), ClassLabel::Abstract), ("b".to_string(), ClassLabel::Concrete)].into();
        (idx, concept, class)
    }

    #[test]
    fn identical_and_orthogonal() {
        let idx = index(&[("a", vec![1.0, 0.0]), ("b", vec![2.0, 0.0]), ("c", vec![0.0, 1.0])]);
        let r = idx.query("a", 1).unwrap();
        assert_eq!(r.neighbors, vec![Neighbor { image_id: "b".into(), similarity: 1.0 }]);
        let all = idx.query("c", 2).unwrap();
        assert_eq!(all.neighbors.len(), 2);
        assert!(all.neighbors.iter().all(|n| n.similarity == 0.0));
        assert_eq!(all.neighbors[0].image_id, "a");
        assert!(idx.query("a", 3).is_err());
        assert!(idx.query("z", 1).is_err());
    }

    #[test]
    fn zero_query_flagged() {
        let idx = index(&[("a", vec![0.0, 0.0]), ("b", vec![1.0, 0.0]), ("c", vec![0.0, 1.0])]);
        let r = idx.query("a", 2).unwrap();
        assert!(r.zero_query);
        assert_eq!(r.neighbors[0].image_id, "b");
    }

    #[test]
    fn separated_concepts_are_all_same_concept() {
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        let (idx, concept, class) = two_concepts([e1.clone(), e1.clone(), e1, e2.clone(), e2.clone(), e2]);
        let r = neighbor_report(Attribute::Color, &idx, &concept, &class, 2).unwrap();
        assert!(r.per_image.values().all(|i| i.same_concept_fraction == 100.0));
        assert_eq!(r.per_class[&ClassLabel::Abstract], 100.0);
        assert_eq!(r.per_class[&ClassLabel::Concrete], 100.0);
        // 5 neighbours each: 2 at similarity 1, 3 at 0
        assert!((r.mean_topk_similarity[&ClassLabel::Abstract] - 0.4).abs() < 1e-15);
    }

    // With every vector equal, each image's 5 neighbours are all the others,
    // 2 of which share its concept.
    #[test]
    fn identical_everywhere_is_forty_percent() {
        let v = vec![0.5, 0.5];
        let (idx, concept, class) = two_concepts(std::array::from_fn(|_| v.clone()));
        let r = neighbor_report(Attribute::Color, &idx, &concept, &class, 5).unwrap();
        assert!(r.per_image.values().all(|i| (i.same_concept_fraction - 40.0).abs() < 1e-12));
        assert!((r.per_class[&ClassLabel::Concrete] - 40.0).abs() < 1e-12);
        assert!((r.mean_topk_similarity[&ClassLabel::Concrete] - 1.0).abs() < 1e-12);
        assert_eq!(r.per_image["a1"].neighbors, vec!["a2", "a3", "b1", "b2", "b3"]);
    }

    #[test]
    fn orthogonal_images_have_zero_mean_similarity() {
        let idx = index(&[
            ("a", vec![1.0, 0.0, 0.0, 0.0]),
            ("b", vec![0.0, 1.0, 0.0, 0.0]),
            ("c", vec![0.0, 0.0, 1.0, 0.0]),
            ("d", vec![0.0, 0.0, 0.0, 1.0]),
        ]);
        let concept = ["a", "b", "c", "d"].iter().map(|i| (i.to_string(), "x".to_string())).collect();
        let class = [("x".to_string(), ClassLabel::Abstract)].into();
        let r = neighbor_report(Attribute::Color, &idx, &concept, &class, 3).unwrap();
        assert_eq!(r.mean_topk_similarity[&ClassLabel::Abstract], 0.0);
    }

    #[test]
    fn index_validation() {
        assert!(NeighborIndex::new(vec![("a".into(), vec![1.0]), ("a".into(), vec![1.0])]).is_err());
        assert!(NeighborIndex::new(vec![("a".into(), vec![1.0]), ("b".into(), vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn table_layout() {
        let vals: BTreeMap<ClassLabel, f64> = [(ClassLabel::Abstract, 2.83), (ClassLabel::Concrete, 26.44)].into();
        let mut out = Vec::new();
        write_class_table(&mut out, &[(Attribute::Vit, &vals)]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "attribute,A,C\nViT,2.8300,26.4400\n");
    }
}
