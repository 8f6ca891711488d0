//! Gray-level co-occurrence statistics.

use crate::pixels::PixelGrid;

pub const GLCM_LEVELS: usize = 8;

/// Pixel offsets `(dx, dy)` at distance one for 0, 45, 90 and 135 degrees,
/// with y pointing down the image.
pub const OFFSETS: [(i32, i32); 4] = [(1, 0), (1, -1), (0, -1), (-1, -1)];

pub const GLCM_STATS_DIM: usize = OFFSETS.len() * 4;

/// Symmetrised, normalised co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMatrix {
    pub levels: usize,
    pub offsets: Vec<(i32, i32)>,
    /// Row-major `levels x levels`.
    pub cooc: Vec<f64>,
}

impl GlcmMatrix {
    /// Count co-occurrences over all `offsets` in an image of quantised
    /// levels (`values[i] < levels`), count both orderings of every pair, and
    /// normalise to sum one. With no valid pair the matrix stays all zero.
    pub fn from_levels(values: &[u8], width: usize, height: usize, levels: usize, offsets: &[(i32, i32)]) -> Self {
        assert_eq!(values.len(), width * height);
        let mut cooc = vec![0.0; levels * levels];
        for &(dx, dy) in offsets {
            for y in 0..height as i64 {
                for x in 0..width as i64 {
                    let (nx, ny) = (x + i64::from(dx), y + i64::from(dy));
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let a = values[(y as usize) * width + x as usize] as usize;
                    let b = values[(ny as usize) * width + nx as usize] as usize;
                    cooc[a * levels + b] += 1.0;
                    cooc[b * levels + a] += 1.0;
                }
            }
        }
        let total: f64 = cooc.iter().sum();
        if total > 0.0 {
            cooc.iter_mut().for_each(|v| *v /= total);
        }
        Self {
            levels,
            offsets: offsets.to_vec(),
            cooc,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cooc[i * self.levels + j]
    }

    pub fn contrast(&self) -> f64 {
        self.weighted(|i, j| ((i as f64) - (j as f64)).powi(2))
    }

    pub fn energy(&self) -> f64 {
        self.cooc.iter().map(|p| p * p).sum()
    }

    pub fn homogeneity(&self) -> f64 {
        self.weighted(|i, j| 1.0 / (1.0 + ((i as f64) - (j as f64)).powi(2)))
    }

    /// Pearson correlation of the pair levels; `None` when either marginal
    /// has zero variance.
    pub fn correlation(&self) -> Option<f64> {
        let n = self.levels;
        let (mut mi, mut mj) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let p = self.get(i, j);
                mi += i as f64 * p;
                mj += j as f64 * p;
            }
        }
        let (mut vi, mut vj, mut cov) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let p = self.get(i, j);
                let (di, dj) = (i as f64 - mi, j as f64 - mj);
                vi += di * di * p;
                vj += dj * dj * p;
                cov += di * dj * p;
            }
        }
        if vi <= 1e-15 || vj <= 1e-15 {
            None
        } else {
            Some(cov / (vi * vj).sqrt())
        }
    }

    fn weighted(&self, w: impl Fn(usize, usize) -> f64) -> f64 {
        let n = self.levels;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += w(i, j) * self.get(i, j);
            }
        }
        acc
    }
}

/// Contrast, correlation, energy and homogeneity for each of the four
/// offsets (16 values, offset-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmStats {
    pub values: [f64; GLCM_STATS_DIM],
    /// Set where correlation was undefined (zero variance) and reported as 0.
    pub zero_variance: [bool; 4],
}

/// Quantise 8-bit gray values into `levels` equal-width bins.
pub fn quantize(gray: &PixelGrid, levels: usize) -> Vec<u8> {
    let g = gray.to_gray();
    g.as_bytes()
        .iter()
        .map(|&v| ((usize::from(v) * levels) / 256) as u8)
        .collect()
}

pub fn stats_from_levels(values: &[u8], width: usize, height: usize, levels: usize) -> GlcmStats {
    let mut out = GlcmStats {
        values: [0.0; GLCM_STATS_DIM],
        zero_variance: [false; 4],
    };
    for (k, off) in OFFSETS.iter().enumerate() {
        let m = GlcmMatrix::from_levels(values, width, height, levels, std::slice::from_ref(off));
        let corr = m.correlation();
        out.zero_variance[k] = corr.is_none();
        out.values[k * 4] = m.contrast();
        out.values[k * 4 + 1] = corr.unwrap_or(0.0);
        out.values[k * 4 + 2] = m.energy();
        out.values[k * 4 + 3] = m.homogeneity();
    }
    out
}

/// GLCM statistics of an image quantised to [`GLCM_LEVELS`] gray levels.
pub fn glcm_stats(img: &PixelGrid) -> GlcmStats {
    let gray = img.to_gray();
    let q = quantize(&gray, GLCM_LEVELS);
    stats_from_levels(&q, gray.width(), gray.height(), GLCM_LEVELS)
}
