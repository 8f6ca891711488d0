//! Per-concept image similarity matrices and their eigenvalue spectra.
//!
//! For each concept and attribute the N images are compared pairwise with
//! cosine similarity. The sorted eigenvalues of the resulting N x N matrix
//! summarise how varied the image set is without depending on image order:
//! N identical images give `(N, 0, ..., 0)`, N mutually orthogonal images
//! give `(1, ..., 1)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::features::Attribute;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub lemma: String,
    pub attribute: Attribute,
    pub n: usize,
    /// Row-major `n x n`.
    pub entries: Vec<f64>,
    /// Rows whose feature vector was all zero; they have similarity 0 to
    /// everything, including themselves.
    pub zero_rows: Vec<usize>,
}

impl SimilarityMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Simultaneous row/column permutation: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> SimilarityMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        let mut zero_rows: Vec<usize> = (0..n).filter(|&i| self.zero_rows.contains(&perm[i])).collect();
        zero_rows.sort_unstable();
        SimilarityMatrix {
            entries,
            zero_rows,
            ..self.clone()
        }
    }
}

/// Cosine similarity; zero if either vector is all zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

/// Pairwise cosine similarities of one concept's images for one attribute.
/// Each off-diagonal value is computed once and mirrored; the diagonal is
/// exactly 1 for non-zero vectors.
pub fn similarity_matrix<V: AsRef<[f64]>>(lemma: &str, attribute: Attribute, vectors: &[V]) -> Result<SimilarityMatrix> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::validation(format!(
            "`{lemma}`/{attribute}: need at least 2 images, got {n}"
        )));
    }
    let dim = vectors[0].as_ref().len();
    if let Some(bad) = vectors.iter().position(|v| v.as_ref().len() != dim) {
        return Err(Error::validation(format!(
            "`{lemma}`/{attribute}: vector {bad} has dim {} but the first has {dim}",
            vectors[bad].as_ref().len()
        )));
    }
    let zero_rows: Vec<usize> = (0..n).filter(|&i| vectors[i].as_ref().iter().all(|&v| v == 0.0)).collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        if !zero_rows.contains(&i) {
            entries[i * n + i] = 1.0;
        }
        for j in i + 1..n {
            let s = cosine(vectors[i].as_ref(), vectors[j].as_ref());
            entries[i * n + j] = s;
            entries[j * n + i] = s;
        }
    }
    Ok(SimilarityMatrix {
        lemma: lemma.to_string(),
        attribute,
        n,
        entries,
        zero_rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub lemma: String,
    pub attribute: Attribute,
    pub n: usize,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
}

/// Real eigenvalues of a symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(n: usize, entries: &[f64]) -> Result<Vec<f64>> {
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (entries[i * n + j], entries[j * n + i]);
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(Error::validation(format!(
                    "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                )));
            }
        }
    }
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let m = DMatrix::from_row_slice(n, n, entries);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn eigenspectrum(m: &SimilarityMatrix) -> Result<EigenSpectrum> {
    Ok(EigenSpectrum {
        lemma: m.lemma.clone(),
        attribute: m.attribute,
        n: m.n,
        eigenvalues: symmetric_eigenvalues(m.n, &m.entries)?,
    })
}

/// Concatenated spectra for one concept, ready for a classifier or regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptSample {
    pub lemma: String,
    pub class_label: Option<ClassLabel>,
    pub rating: Option<f64>,
    pub vector: Vec<f64>,
    /// Attribute blocks in concatenation order with their lengths.
    pub attribute_manifest: Vec<(Attribute, usize)>,
}

/// Concatenate the spectra named in `order`.
pub fn combine(
    lemma: &str,
    class_label: Option<ClassLabel>,
    rating: Option<f64>,
    spectra: &BTreeMap<Attribute, EigenSpectrum>,
    order: &[Attribute],
) -> Result<ConceptSample> {
    let missing: Vec<&str> = order.iter().filter(|a| !spectra.contains_key(a)).map(|a| a.name()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingAttribute {
            lemma: lemma.to_string(),
            missing: missing.join(", "),
        });
    }
    let n = spectra[&order[0]].n;
    let mut vector = Vec::new();
    let mut manifest = Vec::with_capacity(order.len());
    for a in order {
        let s = &spectra[a];
        if s.n != n {
            return Err(Error::validation(format!(
                "`{lemma}`: {a} spectrum has N={} but {} has N={n}",
                s.n, order[0]
            )));
        }
        vector.extend_from_slice(&s.eigenvalues);
        manifest.push((*a, s.eigenvalues.len()));
    }
    Ok(ConceptSample {
        lemma: lemma.to_string(),
        class_label,
        rating,
        vector,
        attribute_manifest: manifest,
    })
}
