//! Histogram of oriented gradients.
//!
//! Dense layout: 8x8-pixel cells, 9 unsigned orientation bins over
//! `[0, 180)` degrees with hard binning weighted by gradient magnitude,
//! 2x2-cell blocks at a stride of one cell, L2-Hys normalised. A 256x256
//! image yields `31 * 31 * 4 * 9 = 34_596` values.

use super::{Attribute, FeatureVector};
use crate::error::{Error, Result};
use crate::pixels::PixelGrid;

pub const CELL_SIDE: usize = 8;
pub const ORIENTATIONS: usize = 9;
pub const BLOCK_CELLS: usize = 2;
const EPS: f64 = 1e-6;
const HYS_CLIP: f64 = 0.2;

/// Descriptor length for an image of the given size.
pub fn hog_dim(width: usize, height: usize) -> usize {
    let (cx, cy) = (width / CELL_SIDE, height / CELL_SIDE);
    if cx < BLOCK_CELLS || cy < BLOCK_CELLS {
        return 0;
    }
    (cx - BLOCK_CELLS + 1) * (cy - BLOCK_CELLS + 1) * BLOCK_CELLS * BLOCK_CELLS * ORIENTATIONS
}

/// Central-difference gradients with edge replication: `(gx, gy)` per pixel.
pub fn gradients(gray: &PixelGrid) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (gray.width(), gray.height());
    let px = |x: usize, y: usize| f64::from(gray.gray(x, y));
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            gx[y * w + x] = px((x + 1).min(w - 1), y) - px(x.saturating_sub(1), y);
            gy[y * w + x] = px(x, (y + 1).min(h - 1)) - px(x, y.saturating_sub(1));
        }
    }
    (gx, gy)
}

/// Unsigned gradient orientation in degrees, `[0, 180)`.
#[inline]
pub fn unsigned_orientation(gx: f64, gy: f64) -> f64 {
    let mut a = gy.atan2(gx).to_degrees();
    if a < 0.0 {
        a += 180.0;
    }
    if a >= 180.0 {
        a -= 180.0;
    }
    a
}

#[inline]
pub fn orientation_bin(angle: f64) -> usize {
    ((angle / (180.0 / ORIENTATIONS as f64)) as usize).min(ORIENTATIONS - 1)
}

/// Per-cell orientation histograms, row-major over cells.
pub fn cell_histograms(gray: &PixelGrid) -> (usize, usize, Vec<[f64; ORIENTATIONS]>) {
    let (w, h) = (gray.width(), gray.height());
    let (cx, cy) = (w / CELL_SIDE, h / CELL_SIDE);
    let (gx, gy) = gradients(gray);
    let mut cells = vec![[0.0; ORIENTATIONS]; cx * cy];
    for y in 0..cy * CELL_SIDE {
        for x in 0..cx * CELL_SIDE {
            let (dx, dy) = (gx[y * w + x], gy[y * w + x]);
            let mag = dx.hypot(dy);
            if mag == 0.0 {
                continue;
            }
            let b = orientation_bin(unsigned_orientation(dx, dy));
            cells[(y / CELL_SIDE) * cx + x / CELL_SIDE][b] += mag;
        }
    }
    (cx, cy, cells)
}

fn l2_hys(block: &mut [f64]) {
    let norm = |b: &[f64]| (b.iter().map(|v| v * v).sum::<f64>() + EPS * EPS).sqrt();
    let n = norm(block);
    block.iter_mut().for_each(|v| *v = (*v / n).min(HYS_CLIP));
    let n = norm(block);
    block.iter_mut().for_each(|v| *v /= n);
}

/// HOG descriptor of an image (converted to grayscale if needed).
pub fn hog(image_id: &str, img: &PixelGrid) -> Result<FeatureVector> {
    let gray = img.to_gray();
    let dim = hog_dim(gray.width(), gray.height());
    if dim == 0 {
        return Err(Error::validation(format!(
            "image {}x{} too small for HOG blocks",
            gray.width(),
            gray.height()
        )));
    }
    let (cx, cy, cells) = cell_histograms(&gray);
    let mut values = Vec::with_capacity(dim);
    let mut block = Vec::with_capacity(BLOCK_CELLS * BLOCK_CELLS * ORIENTATIONS);
    for by in 0..=cy - BLOCK_CELLS {
        for bx in 0..=cx - BLOCK_CELLS {
            block.clear();
            for dy in 0..BLOCK_CELLS {
                for dx in 0..BLOCK_CELLS {
                    block.extend_from_slice(&cells[(by + dy) * cx + bx + dx]);
                }
            }
            l2_hys(&mut block);
            values.extend_from_slice(&block);
        }
    }
    debug_assert_eq!(values.len(), dim);
    Ok(FeatureVector {
        image_id: image_id.to_string(),
        attribute: Attribute::Hog,
        dim,
        values,
    })
}

/// Sum of descriptor energy per orientation bin across all blocks.
pub fn bin_totals(fv: &FeatureVector) -> [f64; ORIENTATIONS] {
    let mut t = [0.0; ORIENTATIONS];
    for (i, v) in fv.values.iter().enumerate() {
        t[i % ORIENTATIONS] += v;
    }
    t
}
