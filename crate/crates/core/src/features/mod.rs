//! Per-image visual attributes.
//!
//! Every extractor turns one image (or one image's detections/embedding)
//! into a [`FeatureVector`] of fixed dimension for its [`Attribute`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod codebook;
pub mod color;
pub mod gist;
pub mod glcm;
pub mod hog;
pub mod lbp;
pub mod surf;

pub use codebook::{bow_encode, build_codebook, CodeBook, KMeansOptions};
pub use color::color_hsv;
pub use gist::gist;
pub use glcm::{glcm_stats, GlcmMatrix, GlcmStats};
pub use hog::hog;
pub use lbp::{lbp_code, lbph, texture};
pub use surf::{detect_and_describe, InterestPoint, SurfOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attribute {
    Color,
    #[serde(rename = "HOG")]
    Hog,
    Texture,
    #[serde(rename = "GIST")]
    Gist,
    #[serde(rename = "SURF")]
    Surf,
    #[serde(rename = "YOLO")]
    Yolo,
    ObjectLoc,
    SimClr,
    #[serde(rename = "ViT")]
    Vit,
}

impl Attribute {
    pub const ALL: [Attribute; 9] = [
        Attribute::Color,
        Attribute::Hog,
        Attribute::Texture,
        Attribute::Gist,
        Attribute::Surf,
        Attribute::Yolo,
        Attribute::ObjectLoc,
        Attribute::SimClr,
        Attribute::Vit,
    ];

    /// The seven non-deep attributes, in the order they are concatenated
    /// for the "Combined Basic" feature set.
    pub const BASIC: [Attribute; 7] = [
        Attribute::Color,
        Attribute::Hog,
        Attribute::Texture,
        Attribute::Gist,
        Attribute::Surf,
        Attribute::Yolo,
        Attribute::ObjectLoc,
    ];

    /// Attributes computed from pixels by this crate.
    pub const IMAGE_BASED: [Attribute; 5] = [
        Attribute::Color,
        Attribute::Hog,
        Attribute::Texture,
        Attribute::Gist,
        Attribute::Surf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Color => "Color",
            Attribute::Hog => "HOG",
            Attribute::Texture => "Texture",
            Attribute::Gist => "GIST",
            Attribute::Surf => "SURF",
            Attribute::Yolo => "YOLO",
            Attribute::ObjectLoc => "ObjectLoc",
            Attribute::SimClr => "SimClr",
            Attribute::Vit => "ViT",
        }
    }

    /// Histogram-type attributes whose values must be non-negative.
    pub fn is_histogram(self) -> bool {
        matches!(self, Attribute::Color | Attribute::Surf)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Attribute::ALL
            .into_iter()
            .find(|a| a.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::validation(format!("unknown attribute `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub image_id: String,
    pub attribute: Attribute,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(image_id: impl Into<String>, attribute: Attribute, values: Vec<f64>) -> Result<Self> {
        let fv = Self {
            image_id: image_id.into(),
            attribute,
            dim: values.len(),
            values,
        };
        fv.validate()?;
        Ok(fv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.values.len() != self.dim {
            return Err(Error::validation(format!(
                "{} {}: {} values for declared dim {}",
                self.attribute,
                self.image_id,
                self.values.len(),
                self.dim
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "{} {}: non-finite value at index {i}",
                self.attribute, self.image_id
            )));
        }
        if self.attribute.is_histogram() && self.values.iter().any(|&v| v < 0.0) {
            return Err(Error::validation(format!(
                "{} {}: negative histogram entry",
                self.attribute, self.image_id
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Normalize a count histogram in place so it sums to one. All-zero
/// histograms are left untouched.
pub(crate) fn normalize_histogram(h: &mut [f64]) {
    let total: f64 = h.iter().sum();
    if total > 0.0 {
        h.iter_mut().for_each(|v| *v /= total);
    }
}

/// JSON Lines store holding one attribute's vectors, keyed by image id.
///
/// Vectors are kept in a `BTreeMap` so iteration (and everything derived
/// from it) is ordered by image id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureStore {
    pub attribute: Option<Attribute>,
    rows: BTreeMap<String, FeatureVector>,
}

impl FeatureStore {
    pub fn new(attribute: Attribute) -> Self {
        Self {
            attribute: Some(attribute),
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, fv: FeatureVector) -> Result<()> {
        let attr = *self.attribute.get_or_insert(fv.attribute);
        if fv.attribute != attr {
            return Err(Error::validation(format!(
                "store holds {attr} vectors, got {}",
                fv.attribute
            )));
        }
        if let Some(existing) = self.rows.values().next() {
            if existing.dim != fv.dim {
                return Err(Error::validation(format!(
                    "{attr}: dim {} differs from store dim {}",
                    fv.dim, existing.dim
                )));
            }
        }
        self.rows.insert(fv.image_id.clone(), fv);
        Ok(())
    }

    pub fn get(&self, image_id: &str) -> Option<&FeatureVector> {
        self.rows.get(image_id)
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.rows.contains_key(image_id)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.rows.values().next().map(|f| f.dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureVector> {
        self.rows.values()
    }

    /// Load a store from JSON Lines; a missing file yields an empty store.
    pub fn load(path: &Path) -> Result<Self> {
        let mut store = FeatureStore::default();
        if !path.exists() {
            return Ok(store);
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let rows: Vec<FeatureVector> =
            crate::corpus::read_jsonl(BufReader::new(file), &path.display().to_string())?;
        for fv in rows {
            fv.validate()?;
            store.insert(fv)?;
        }
        Ok(store)
    }

    /// Append vectors to a JSON Lines file.
    pub fn append_to(path: &Path, rows: &[FeatureVector]) -> Result<()> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for fv in rows {
            serde_json::to_writer(&mut w, fv)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Rewrite the whole store sorted by image id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let rows: Vec<_> = self.rows.values().cloned().collect();
        crate::corpus::write_jsonl(path, &rows)
    }
}
