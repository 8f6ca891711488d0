//! Krippendorff's alpha for nominal data with missing ratings.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Items by raters; `None` marks a missing rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementTable {
    pub items: Vec<Vec<Option<String>>>,
}

impl AgreementTable {
    pub fn new(items: Vec<Vec<Option<String>>>) -> Self {
        Self { items }
    }

    /// Rows are items, columns are raters, an empty cell is missing. The
    /// first row is a header and is skipped.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
        let mut items = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            items.push(
                rec.iter()
                    .map(|c| {
                        let c = c.trim();
                        (!c.is_empty()).then(|| c.to_string())
                    })
                    .collect(),
            );
        }
        Ok(Self { items })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(f)
    }
}

/// Nominal alpha, `1 - D_o / D_e`, built from the coincidence matrix of
/// pairable values. Items with fewer than two ratings are ignored. When every
/// pairable value falls in one category there is no expected disagreement and
/// alpha is 1.
pub fn krippendorff_alpha(table: &AgreementTable) -> Result<f64> {
    let mut coincidence: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for item in &table.items {
        let values: Vec<&str> = item.iter().flatten().map(String::as_str).collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry((a, b)).or_default() += w;
                }
            }
        }
    }
    if coincidence.is_empty() {
        return Err(Error::validation("no item has two or more ratings"));
    }
    let mut marginals: BTreeMap<&str, f64> = BTreeMap::new();
    let mut observed = 0.0;
    for (&(a, b), &o) in &coincidence {
        *marginals.entry(a).or_default() += o;
        if a != b {
            observed += o;
        }
    }
    let n: f64 = marginals.values().sum();
    let sq: f64 = marginals.values().map(|v| v * v).sum();
    let expected_pairs = n * n - sq;
    if expected_pairs == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected_pairs)
}
