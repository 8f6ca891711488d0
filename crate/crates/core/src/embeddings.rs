//! Loading externally computed dense image embeddings (ViT, SimClr).
//!
//! Binary layout, little-endian throughout:
//!
//! ```text
//! "VDEM"  version:u8  tag_len:u16  tag bytes  dim:u32  rows:u64
//! rows x ( id_len:u16  id bytes  dim x f32 )
//! ```
//!
//! The JSON Lines alternative stores one `{"image_id","values":[...]}` object
//! per line, with `{"model_tag","dim"}` in a sidecar `<file>.header.json`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Attribute, FeatureVector};

pub const MAGIC: &[u8; 4] = b"VDEM";
pub const FORMAT_VERSION: u8 = 1;
pub const VIT_DIM: usize = 768;
pub const SIMCLR_DIM: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub model_tag: String,
    pub dim: usize,
    pub rows: Vec<(String, Vec<f32>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingHeader {
    pub model_tag: String,
    pub dim: usize,
}

#[derive(Deserialize, Serialize)]
struct JsonRow {
    image_id: String,
    values: Vec<f32>,
}

/// Attribute implied by a model tag (`vit-*` or `simclr-*`).
pub fn attribute_for_tag(tag: &str) -> Result<Attribute> {
    let t = tag.to_ascii_lowercase();
    if t.starts_with("vit") {
        Ok(Attribute::Vit)
    } else if t.starts_with("simclr") {
        Ok(Attribute::SimClr)
    } else {
        Err(Error::validation(format!("unrecognised model tag `{tag}`")))
    }
}

/// Default embedding width for an attribute.
pub fn default_dim(attr: Attribute) -> Option<usize> {
    match attr {
        Attribute::Vit => Some(VIT_DIM),
        Attribute::SimClr => Some(SIMCLR_DIM),
        _ => None,
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".header.json");
    PathBuf::from(s)
}

impl EmbeddingFile {
    /// Check row widths, finiteness and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::validation("embedding dim must be positive"));
        }
        let mut seen = HashSet::new();
        for (id, values) in &self.rows {
            if !seen.insert(id.as_str()) {
                return Err(Error::validation(format!("duplicate image_id `{id}`")));
            }
            if values.len() != self.dim {
                return Err(Error::validation(format!(
                    "row `{id}` has {} values, header declares {}",
                    values.len(),
                    self.dim
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("row `{id}` contains NaN or infinite values")));
            }
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[FORMAT_VERSION])?;
        w.write_all(&(self.model_tag.len() as u16).to_le_bytes())?;
        w.write_all(self.model_tag.as_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        for (id, values) in &self.rows {
            w.write_all(&(id.len() as u16).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, source_name: &str) -> Result<Self> {
        let io = |e: std::io::Error| Error::io(source_name, e);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::validation(format!("{source_name}: missing VDEM magic")));
        }
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1).map_err(io)?;
        if b1[0] != FORMAT_VERSION {
            return Err(Error::validation(format!(
                "{source_name}: unsupported format version {}",
                b1[0]
            )));
        }
        let model_tag = read_string(&mut r).map_err(io)?;
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        let dim = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(io)?;
        let count = u64::from_le_bytes(b8);
        let mut rows = Vec::new();
        for _ in 0..count {
            let id = read_string(&mut r).map_err(io)?;
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                r.read_exact(&mut b4).map_err(|e| {
                    Error::validation(format!("{source_name}: row `{id}` truncated ({e})"))
                })?;
                values.push(f32::from_le_bytes(b4));
            }
            rows.push((id, values));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(io)? != 0 {
            return Err(Error::validation(format!("{source_name}: trailing bytes after last row")));
        }
        let file = Self { model_tag, dim, rows };
        file.validate()?;
        Ok(file)
    }

    /// JSON Lines rows plus the sidecar header.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let header = EmbeddingHeader {
            model_tag: self.model_tag.clone(),
            dim: self.dim,
        };
        let side = sidecar_path(path);
        std::fs::write(&side, serde_json::to_vec(&header)?).map_err(|e| Error::io(&side, e))?;
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        for (id, values) in &self.rows {
            serde_json::to_writer(
                &mut w,
                &JsonRow {
                    image_id: id.clone(),
                    values: values.clone(),
                },
            )?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let side = sidecar_path(path);
        let header_bytes = std::fs::read(&side).map_err(|e| Error::io(&side, e))?;
        let header: EmbeddingHeader = serde_json::from_slice(&header_bytes)
            .map_err(|e| Error::parse(side.display().to_string(), 1, e.to_string()))?;
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut rows = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            // NaN / Infinity are not valid JSON numbers, so they surface here
            let row: JsonRow = serde_json::from_str(&line).map_err(|e| Error::parse(&name, i + 1, e.to_string()))?;
            rows.push((row.image_id, row.values));
        }
        let file = Self {
            model_tag: header.model_tag,
            dim: header.dim,
            rows,
        };
        file.validate()?;
        Ok(file)
    }

    /// Read either format, sniffing the magic bytes.
    pub fn read(path: &Path) -> Result<Self> {
        let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut head = [0u8; 4];
        let n = f.read(&mut head).map_err(|e| Error::io(path, e))?;
        if n == 4 && &head == MAGIC {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            Self::read_binary(BufReader::new(f), &path.display().to_string())
        } else {
            Self::read_jsonl(path)
        }
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_binary(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Convert to feature vectors keyed by image id.
    pub fn into_features(self, expected_dim: Option<usize>) -> Result<BTreeMap<String, FeatureVector>> {
        self.validate()?;
        if let Some(d) = expected_dim {
            if d != self.dim {
                return Err(Error::validation(format!(
                    "embedding dim {} does not match expected {d}",
                    self.dim
                )));
            }
        }
        let attr = attribute_for_tag(&self.model_tag)?;
        self.rows
            .into_iter()
            .map(|(id, v)| {
                let fv = FeatureVector::new(id.clone(), attr, v.into_iter().map(f64::from).collect())?;
                Ok((id, fv))
            })
            .collect()
    }
}

fn read_string<R: Read>(r: &mut R) -> std::io::Result<String> {
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let mut buf = vec![0u8; u16::from_le_bytes(b2) as usize];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

/// Load an embedding file (either format) into feature vectors.
pub fn ingest_embeddings(path: &Path, expected_dim: Option<usize>) -> Result<BTreeMap<String, FeatureVector>> {
    EmbeddingFile::read(path)?.into_features(expected_dim)
}
