//! Local binary pattern histograms and the combined texture attribute.

use super::glcm::{glcm_stats, GLCM_STATS_DIM};
use super::{normalize_histogram, Attribute, FeatureVector};
use crate::error::{Error, Result};
use crate::pixels::PixelGrid;

pub const LBP_BINS: usize = 256;
pub const TEXTURE_DIM: usize = GLCM_STATS_DIM + LBP_BINS;

/// Neighbour offsets clockwise from the top-left; neighbour `i` sets bit `i`.
const NEIGHBOURS: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

/// 8-neighbour, radius-1 code of an interior pixel. A bit is set when the
/// neighbour is greater than or equal to the centre.
#[inline]
pub fn lbp_code(gray: &PixelGrid, x: usize, y: usize) -> u8 {
    let c = gray.gray(x, y);
    let mut code = 0u8;
    for (bit, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
        let n = gray.gray((x as i32 + dx) as usize, (y as i32 + dy) as usize);
        if n >= c {
            code |= 1 << bit;
        }
    }
    code
}

/// Normalised 256-bin histogram of interior-pixel codes.
pub fn lbph(img: &PixelGrid) -> Result<Vec<f64>> {
    let gray = img.to_gray();
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return Err(Error::validation(format!("LBP needs at least 3x3 pixels, got {w}x{h}")));
    }
    let mut hist = vec![0.0; LBP_BINS];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            hist[lbp_code(&gray, x, y) as usize] += 1.0;
        }
    }
    normalize_histogram(&mut hist);
    Ok(hist)
}

/// Texture attribute: 16 GLCM statistics followed by the LBP histogram.
pub fn texture(image_id: &str, img: &PixelGrid) -> Result<FeatureVector> {
    let gray = img.to_gray();
    let mut values = Vec::with_capacity(TEXTURE_DIM);
    values.extend_from_slice(&glcm_stats(&gray).values);
    values.extend(lbph(&gray)?);
    Ok(FeatureVector {
        image_id: image_id.to_string(),
        attribute: Attribute::Texture,
        dim: TEXTURE_DIM,
        values,
    })
}
