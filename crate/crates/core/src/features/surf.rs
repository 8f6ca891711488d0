//! SURF-style interest points: a box-filter Hessian detector over an
//! integral image and an upright 64-d Haar-wavelet descriptor.
//!
//! This follows the usual fast-Hessian construction but makes no attempt at
//! bit compatibility with any reference binary, and skips orientation
//! assignment (descriptors are upright).

use crate::pixels::PixelGrid;

pub const DESCRIPTOR_DIM: usize = 64;

#[derive(Debug, Clone)]
pub struct SurfOptions {
    /// Box filter side lengths, ascending. Each must be `3 * l` for odd `l`.
    pub filter_sizes: Vec<usize>,
    /// Minimum normalised Hessian determinant (intensities scaled to [0, 1]).
    pub threshold: f64,
    pub max_points: usize,
}

impl Default for SurfOptions {
    fn default() -> Self {
        Self {
            filter_sizes: vec![9, 15, 21, 27, 39, 51, 75],
            threshold: 1e-4,
            max_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterestPoint {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    pub response: f64,
    pub descriptor: Vec<f64>,
}

/// Summed-area table with a zero row and column prepended.
pub struct IntegralImage {
    width: usize,
    height: usize,
    sums: Vec<f64>,
}

impl IntegralImage {
    pub fn new(gray: &PixelGrid) -> Self {
        let (w, h) = (gray.width(), gray.height());
        let mut sums = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += f64::from(gray.gray(x, y)) / 255.0;
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Sum over the rectangle with top-left `(x, y)` and size `w x h`,
    /// clipped to the image.
    pub fn box_sum(&self, x: i64, y: i64, w: i64, h: i64) -> f64 {
        let x0 = x.clamp(0, self.width as i64) as usize;
        let y0 = y.clamp(0, self.height as i64) as usize;
        let x1 = (x + w).clamp(0, self.width as i64) as usize;
        let y1 = (y + h).clamp(0, self.height as i64) as usize;
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let s = |xx: usize, yy: usize| self.sums[yy * (self.width + 1) + xx];
        s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0)
    }
}

/// Normalised determinant of the box-filter Hessian at `(x, y)` for filter
/// side `size`. The caller guarantees the filter lies inside the image.
pub fn hessian_response(ii: &IntegralImage, x: i64, y: i64, size: usize) -> f64 {
    let l = (size / 3) as i64;
    let b = (size as i64 - 1) / 2;
    let w = size as i64;
    let inv_area = 1.0 / (w * w) as f64;

    // lobes: +1, -2, +1 along the derivative axis
    let dxx = ii.box_sum(x - b, y - l + 1, w, 2 * l - 1) - 3.0 * ii.box_sum(x - l / 2, y - l + 1, l, 2 * l - 1);
    let dyy = ii.box_sum(x - l + 1, y - b, 2 * l - 1, w) - 3.0 * ii.box_sum(x - l + 1, y - l / 2, 2 * l - 1, l);
    let dxy = ii.box_sum(x + 1, y - l, l, l) + ii.box_sum(x - l, y + 1, l, l)
        - ii.box_sum(x - l, y - l, l, l)
        - ii.box_sum(x + 1, y + 1, l, l);

    let (dxx, dyy, dxy) = (dxx * inv_area, dyy * inv_area, dxy * inv_area);
    dxx * dyy - 0.81 * dxy * dxy
}

/// Dense response map for one filter size; `None` where the filter does not
/// fit inside the image.
fn response_map(ii: &IntegralImage, size: usize) -> Vec<Option<f64>> {
    let (w, h) = (ii.width, ii.height);
    let margin = size / 2 + 1;
    let mut out = vec![None; w * h];
    if w <= 2 * margin || h <= 2 * margin {
        return out;
    }
    for y in margin..h - margin {
        for x in margin..w - margin {
            out[y * w + x] = Some(hessian_response(ii, x as i64, y as i64, size));
        }
    }
    out
}

/// Detect interest points and compute their descriptors. Returns at most
/// `opts.max_points`, strongest first.
pub fn detect_and_describe(img: &PixelGrid, opts: &SurfOptions) -> Vec<InterestPoint> {
    let gray = img.to_gray();
    let ii = IntegralImage::new(&gray);
    let (w, h) = (gray.width(), gray.height());
    let maps: Vec<Vec<Option<f64>>> = opts.filter_sizes.iter().map(|&s| response_map(&ii, s)).collect();

    let mut points = Vec::new();
    for si in 1..maps.len().saturating_sub(1) {
        for y in 1..h.saturating_sub(1) {
            for x in 1..w.saturating_sub(1) {
                let Some(v) = maps[si][y * w + x] else { continue };
                if v <= opts.threshold {
                    continue;
                }
                if is_local_max(&maps, si, x, y, w, v) {
                    let (dx, dy) = refine(&maps[si], x, y, w);
                    let size = opts.filter_sizes[si];
                    points.push(InterestPoint {
                        x: x as f64 + dx,
                        y: y as f64 + dy,
                        scale: 1.2 * size as f64 / 9.0,
                        response: v,
                        descriptor: Vec::new(),
                    });
                }
            }
        }
    }

    // strongest first; position breaks ties so the order is total
    points.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    points.truncate(opts.max_points);
    for p in &mut points {
        p.descriptor = describe(&ii, p.x, p.y, p.scale);
    }
    points
}

fn is_local_max(maps: &[Vec<Option<f64>>], si: usize, x: usize, y: usize, w: usize, v: f64) -> bool {
    for map in &maps[si - 1..=si + 1] {
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if std::ptr::eq(map, &maps[si]) && nx == x && ny == y {
                    continue;
                }
                match map[ny * w + nx] {
                    Some(n) if n >= v => return false,
                    None => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Parabolic sub-pixel offset along each axis.
fn refine(map: &[Option<f64>], x: usize, y: usize, w: usize) -> (f64, f64) {
    let at = |xx: usize, yy: usize| map[yy * w + xx].unwrap_or(0.0);
    let c = at(x, y);
    let fit = |m: f64, p: f64| {
        let denom = m - 2.0 * c + p;
        if denom.abs() < 1e-18 {
            0.0
        } else {
            (0.5 * (m - p) / denom).clamp(-0.5, 0.5)
        }
    };
    (fit(at(x - 1, y), at(x + 1, y)), fit(at(x, y - 1), at(x, y + 1)))
}

fn haar_x(ii: &IntegralImage, x: i64, y: i64, s: i64) -> f64 {
    ii.box_sum(x, y - s / 2, s / 2, s) - ii.box_sum(x - s / 2, y - s / 2, s / 2, s)
}

fn haar_y(ii: &IntegralImage, x: i64, y: i64, s: i64) -> f64 {
    ii.box_sum(x - s / 2, y, s, s / 2) - ii.box_sum(x - s / 2, y - s / 2, s, s / 2)
}

/// Upright descriptor: a 20s x 20s window split into 4x4 sub-regions of
/// 5x5 samples, each contributing `(sum dx, sum dy, sum |dx|, sum |dy|)`
/// under a Gaussian weight (sigma 3.3s). L2-normalised; all-zero when flat.
pub fn describe(ii: &IntegralImage, px: f64, py: f64, scale: f64) -> Vec<f64> {
    let haar_size = (2.0 * scale).round().max(2.0) as i64;
    let sigma = 3.3 * scale;
    let mut desc = Vec::with_capacity(DESCRIPTOR_DIM);
    for sy in 0..4 {
        for sx in 0..4 {
            let (mut sdx, mut sdy, mut adx, mut ady) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..5 {
                for i in 0..5 {
                    // sample offsets in units of scale, centred on the point
                    let ox = (sx * 5 + i) as f64 - 9.5;
                    let oy = (sy * 5 + j) as f64 - 9.5;
                    let (sxp, syp) = (px + ox * scale, py + oy * scale);
                    let g = (-(ox * ox + oy * oy) * scale * scale / (2.0 * sigma * sigma)).exp();
                    let (xi, yi) = (sxp.round() as i64, syp.round() as i64);
                    let dx = g * haar_x(ii, xi, yi, haar_size);
                    let dy = g * haar_y(ii, xi, yi, haar_size);
                    sdx += dx;
                    sdy += dy;
                    adx += dx.abs();
                    ady += dy.abs();
                }
            }
            desc.extend_from_slice(&[sdx, sdy, adx, ady]);
        }
    }
    let norm = desc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1e-12 {
        desc.iter_mut().for_each(|v| *v /= norm);
    } else {
        desc.iter_mut().for_each(|v| *v = 0.0);
    }
    desc
}
