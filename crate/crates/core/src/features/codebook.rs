//! k-means visual vocabulary and bag-of-visual-words encoding.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::surf::InterestPoint;
use super::{Attribute, FeatureVector};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"VDCB";
const VERSION: u8 = 1;

pub const DEFAULT_K: usize = 256;
pub const DEFAULT_MAX_TRAINING: usize = 200_000;

#[derive(Debug, Clone)]
pub struct KMeansOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
}

impl KMeansOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeBook {
    pub k: usize,
    pub dim: usize,
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    pub seed: u64,
    pub training_size: usize,
    /// Inertia after seeding and after every Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl CodeBook {
    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn nearest(&self, v: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for i in 0..self.k {
            let d = sq_dist(v, self.centroid(i));
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    pub fn inertia(&self, data: &[Vec<f64>]) -> f64 {
        data.iter().map(|v| self.nearest(v).1).sum()
    }

    /// Binary layout (little-endian): magic `VDCB`, version byte, `k: u32`,
    /// `dim: u32`, `seed: u64`, `training_size: u64`, then `k * dim` f64
    /// centroids row-major.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.k as u32).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.training_size as u64).to_le_bytes())?;
        for v in &self.centroids {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::io("<codebook>", e);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::validation("not a codebook file (bad magic)"));
        }
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1).map_err(io)?;
        if b1[0] != VERSION {
            return Err(Error::validation(format!("unsupported codebook version {}", b1[0])));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(io)?;
        let k = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4).map_err(io)?;
        let dim = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8).map_err(io)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let training_size = u64::from_le_bytes(b8) as usize;
        let mut centroids = Vec::with_capacity(k * dim);
        for _ in 0..k * dim {
            r.read_exact(&mut b8).map_err(io)?;
            centroids.push(f64::from_le_bytes(b8));
        }
        if k < 2 || centroids.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("codebook has k < 2 or non-finite centroids"));
        }
        Ok(Self {
            k,
            dim,
            centroids,
            seed,
            training_size,
            inertia_history: Vec::new(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

fn count_distinct(data: &[Vec<f64>], cap: usize) -> usize {
    let mut keys: Vec<Vec<u64>> = data
        .iter()
        .map(|v| v.iter().map(|x| (x + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len().min(cap)
}

/// k-means++ seeding followed by Lloyd iterations until assignments stop
/// changing or `max_iterations` is reached. A cluster that loses all its
/// members keeps its previous centroid.
pub fn build_codebook(data: &[Vec<f64>], opts: &KMeansOptions) -> Result<CodeBook> {
    let k = opts.k;
    if k < 2 {
        return Err(Error::validation("codebook needs k >= 2"));
    }
    let dim = data.first().map(Vec::len).unwrap_or(0);
    if dim == 0 || data.iter().any(|v| v.len() != dim) {
        return Err(Error::validation("descriptors must be non-empty and share one dimension"));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation("descriptors contain non-finite values"));
    }
    if count_distinct(data, k) < k {
        return Err(Error::validation(format!("need at least {k} distinct descriptors")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut centroids: Vec<f64> = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..data.len());
    centroids.extend_from_slice(&data[first]);
    let mut d2: Vec<f64> = data.iter().map(|v| sq_dist(v, &data[first])).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        // total > 0 is guaranteed while fewer than k distinct points are chosen
        let mut target = rng.random::<f64>() * total;
        let mut pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
        for (i, &d) in d2.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            if target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        centroids.extend_from_slice(&data[pick]);
        let new = &centroids[c * dim..(c + 1) * dim];
        for (dv, v) in d2.iter_mut().zip(data) {
            *dv = dv.min(sq_dist(v, new));
        }
    }

    let mut book = CodeBook {
        k,
        dim,
        centroids,
        seed: opts.seed,
        training_size: data.len(),
        inertia_history: Vec::new(),
    };
    let mut assign: Vec<usize> = data.iter().map(|v| book.nearest(v).0).collect();
    book.inertia_history.push(book.inertia(data));

    for _ in 0..opts.max_iterations {
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (v, &a) in data.iter().zip(&assign) {
            counts[a] += 1;
            for (s, x) in sums[a * dim..(a + 1) * dim].iter_mut().zip(v) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..dim {
                    book.centroids[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
                }
            }
        }
        let next: Vec<usize> = data.iter().map(|v| book.nearest(v).0).collect();
        book.inertia_history.push(book.inertia(data));
        if next == assign {
            break;
        }
        assign = next;
    }
    Ok(book)
}

/// Seeded sample of at most `max` descriptors (all of them if fewer).
pub fn sample_descriptors(data: Vec<Vec<f64>>, max: usize, seed: u64) -> Vec<Vec<f64>> {
    if data.len() <= max {
        return data;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, data.len(), max).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| data[i].clone()).collect()
}

/// Hard-assignment histogram over the vocabulary, normalised to sum one.
/// An empty point list gives the zero vector.
pub fn bow_encode(image_id: &str, points: &[InterestPoint], book: &CodeBook) -> Result<FeatureVector> {
    let mut hist = vec![0.0; book.k];
    for p in points {
        if p.descriptor.len() != book.dim {
            return Err(Error::validation(format!(
                "descriptor dim {} does not match codebook dim {}",
                p.descriptor.len(),
                book.dim
            )));
        }
        hist[book.nearest(&p.descriptor).0] += 1.0;
    }
    super::normalize_histogram(&mut hist);
    Ok(FeatureVector {
        image_id: image_id.to_string(),
        attribute: Attribute::Surf,
        dim: book.k,
        values: hist,
    })
}
