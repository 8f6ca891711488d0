//! GIST scene descriptor: a frequency-domain Gabor bank of 4 scales x 8
//! orientations, with the mean absolute response pooled on a 4x4 grid
//! (`4 * 8 * 16 = 512` values).
//!
//! Filters are Gaussians in the frequency plane centred at radius `f0` and
//! angle `theta`. The DC term and the Nyquist row/column are zeroed, so every
//! filter is zero-mean and the bank maps onto itself under quarter turns.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Attribute, FeatureVector};
use crate::pixels::PixelGrid;

pub const SCALES: usize = 4;
pub const ORIENTATIONS: usize = 8;
pub const GRID: usize = 4;
pub const GIST_DIM: usize = SCALES * ORIENTATIONS * GRID * GRID;

/// Centre frequencies in cycles per pixel, finest first.
pub const CENTER_FREQUENCIES: [f64; SCALES] = [0.25, 0.125, 0.0625, 0.03125];
/// Gaussian width relative to the centre frequency.
pub const BANDWIDTH: f64 = 0.3;

/// Orientation of channel `o` in radians (`o * pi / 8`).
pub fn orientation_angle(o: usize) -> f64 {
    o as f64 * PI / ORIENTATIONS as f64
}

/// Signed frequency of DFT index `k` for length `n`, in cycles per pixel.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    }
}

/// Filter transfer value at frequency `(fx, fy)`, ignoring the DC and
/// Nyquist zeroing applied on the DFT grid.
pub fn transfer(scale: usize, orientation: usize, fx: f64, fy: f64) -> f64 {
    let f0 = CENTER_FREQUENCIES[scale];
    let theta = orientation_angle(orientation);
    let (cx, cy) = (f0 * theta.cos(), f0 * theta.sin());
    let sigma = BANDWIDTH * f0;
    (-((fx - cx).powi(2) + (fy - cy).powi(2)) / (2.0 * sigma * sigma)).exp()
}

/// Precomputed filters and FFT plans for one image size.
pub struct GistBank {
    width: usize,
    height: usize,
    filters: Vec<Vec<f64>>,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl GistBank {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        let mut filters = Vec::with_capacity(SCALES * ORIENTATIONS);
        for s in 0..SCALES {
            for o in 0..ORIENTATIONS {
                let mut h = vec![0.0; width * height];
                for ky in 0..height {
                    for kx in 0..width {
                        let nyquist = (width.is_multiple_of(2) && 2 * kx == width) || (height.is_multiple_of(2) && 2 * ky == height);
                        if (kx == 0 && ky == 0) || nyquist {
                            continue;
                        }
                        h[ky * width + kx] =
                            transfer(s, o, signed_frequency(kx, width), signed_frequency(ky, height));
                    }
                }
                filters.push(h);
            }
        }
        Self {
            width,
            height,
            filters,
            row_fwd: planner.plan_fft_forward(width),
            col_fwd: planner.plan_fft_forward(height),
            row_inv: planner.plan_fft_inverse(width),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let (w, h) = (self.width, self.height);
        let (rows, cols) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        rows.process(data);
        let mut t = vec![Complex64::new(0.0, 0.0); w * h];
        for y in 0..h {
            for x in 0..w {
                t[x * h + y] = data[y * w + x];
            }
        }
        cols.process(&mut t);
        for y in 0..h {
            for x in 0..w {
                data[y * w + x] = t[x * h + y];
            }
        }
        if inverse {
            let scale = 1.0 / (w * h) as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }

    /// Absolute filter response of one channel, row-major.
    pub fn response(&self, spectrum: &[Complex64], scale: usize, orientation: usize) -> Vec<f64> {
        let h = &self.filters[scale * ORIENTATIONS + orientation];
        let mut buf: Vec<Complex64> = spectrum.iter().zip(h).map(|(f, g)| f * g).collect();
        self.fft2(&mut buf, true);
        buf.iter().map(|c| c.norm()).collect()
    }

    pub fn spectrum(&self, gray: &PixelGrid) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = gray
            .as_bytes()
            .iter()
            .map(|&v| Complex64::new(f64::from(v), 0.0))
            .collect();
        self.fft2(&mut buf, false);
        buf
    }

    /// Mean of `values` over each cell of the 4x4 grid, row-major.
    pub fn pool(&self, values: &[f64]) -> [f64; GRID * GRID] {
        let mut out = [0.0; GRID * GRID];
        for gy in 0..GRID {
            let (y0, y1) = (gy * self.height / GRID, (gy + 1) * self.height / GRID);
            for gx in 0..GRID {
                let (x0, x1) = (gx * self.width / GRID, (gx + 1) * self.width / GRID);
                let mut acc = 0.0;
                for y in y0..y1 {
                    for x in x0..x1 {
                        acc += values[y * self.width + x];
                    }
                }
                let n = ((y1 - y0) * (x1 - x0)).max(1);
                out[gy * GRID + gx] = acc / n as f64;
            }
        }
        out
    }

    /// Descriptor layout: scale-major, then orientation, then grid cell.
    pub fn describe(&self, image_id: &str, img: &PixelGrid) -> FeatureVector {
        let gray = img.to_gray();
        assert_eq!((gray.width(), gray.height()), (self.width, self.height), "bank size mismatch");
        let spectrum = self.spectrum(&gray);
        let mut values = Vec::with_capacity(GIST_DIM);
        for s in 0..SCALES {
            for o in 0..ORIENTATIONS {
                values.extend_from_slice(&self.pool(&self.response(&spectrum, s, o)));
            }
        }
        FeatureVector {
            image_id: image_id.to_string(),
            attribute: Attribute::Gist,
            dim: GIST_DIM,
            values,
        }
    }
}

/// GIST descriptor of one image. Builds a filter bank for the image size;
/// use [`GistBank`] directly when describing many images.
pub fn gist(image_id: &str, img: &PixelGrid) -> FeatureVector {
    GistBank::new(img.width(), img.height()).describe(image_id, img)
}

#[inline]
pub fn channel_index(scale: usize, orientation: usize, cell: usize) -> usize {
    (scale * ORIENTATIONS + orientation) * GRID * GRID + cell
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grating(n: usize, cycles_x: f64, cycles_y: f64) -> PixelGrid {
        PixelGrid::gray_from_fn(n, n, |x, y| {
            let phase = 2.0 * PI * (cycles_x * x as f64 + cycles_y * y as f64) / n as f64;
            (128.0 + 100.0 * phase.cos()).round() as u8
        })
    }

    #[test]
    fn constant_image_is_zero() {
        let f = gist("c", &PixelGrid::gray_from_fn(64, 64, |_, _| 173));
        assert_eq!(f.dim, GIST_DIM);
        assert!(f.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn vertical_grating_peaks_at_matching_channel() {
        let n = 128;
        let bank = GistBank::new(n, n);
        for (s, f0) in CENTER_FREQUENCIES.iter().enumerate() {
            let img = grating(n, f0 * n as f64, 0.0);
            let f = bank.describe("g", &img);
            let (best, _) = f
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            let ch = best / (GRID * GRID);
            assert_eq!((ch / ORIENTATIONS, ch % ORIENTATIONS), (s, 0), "scale {s}");
        }
    }

    // Direct oracle for a pure cosine of integer frequency k: the filtered
    // signal is (A/2)[H(f) e^{i phi} + H(-f) e^{-i phi}], so its magnitude can
    // be evaluated pixel by pixel without any FFT and averaged over one cell.
    #[test]
    fn grating_response_matches_direct_evaluation() {
        let n = 64;
        let k = 8.0;
        let amp = 100.0;
        let img = PixelGrid::gray_from_fn(n, n, |x, _| {
            (128.0 + amp * (2.0 * PI * k * x as f64 / n as f64).cos()).round() as u8
        });
        let f = gist("g", &img);
        let (s, o) = (2, 0);
        let hp = transfer(s, o, k / n as f64, 0.0);
        let hm = transfer(s, o, -k / n as f64, 0.0);
        let cell = 5; // row 1, column 1
        let (x0, x1) = (n / 4, n / 2);
        let mut acc = 0.0;
        for x in x0..x1 {
            let phi = 2.0 * PI * k * x as f64 / n as f64;
            let re = 0.5 * amp * (hp + hm) * phi.cos();
            let im = 0.5 * amp * (hp - hm) * phi.sin();
            acc += re.hypot(im);
        }
        let expected = acc / (x1 - x0) as f64;
        let got = f.values[channel_index(s, o, cell)];
        assert!((got - expected).abs() / expected < 0.02, "{got} vs {expected}");
    }

    #[test]
    fn quarter_turn_permutes_orientations_and_cells() {
        let n = 64;
        let img = PixelGrid::gray_from_fn(n, n, |x, y| ((x * x + 3 * y + x * y / 3) % 256) as u8);
        let a = gist("a", &img);
        let b = gist("b", &img.rotate90_ccw());
        for s in 0..SCALES {
            for o in 0..ORIENTATIONS {
                for gy in 0..GRID {
                    for gx in 0..GRID {
                        // old cell (gx, gy) lands at (gy, GRID-1-gx)
                        let new_cell = (GRID - 1 - gx) * GRID + gy;
                        let va = a.values[channel_index(s, o, gy * GRID + gx)];
                        let vb = b.values[channel_index(s, (o + ORIENTATIONS / 2) % ORIENTATIONS, new_cell)];
                        assert!((va - vb).abs() <= 1e-9 * va.abs().max(1.0), "s{s} o{o}: {va} vs {vb}");
                    }
                }
            }
        }
    }

    #[test]
    fn invariant_to_intensity_offset() {
        let base = PixelGrid::gray_from_fn(32, 32, |x, y| ((x * 5 + y * 9) % 150) as u8);
        let shifted = PixelGrid::gray_from_fn(32, 32, |x, y| base.gray(x, y) + 60);
        let (a, b) = (gist("a", &base), gist("b", &shifted));
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn signed_frequency_layout() {
        assert_eq!(signed_frequency(0, 8), 0.0);
        assert_eq!(signed_frequency(3, 8), 0.375);
        assert_eq!(signed_frequency(4, 8), -0.5);
        assert_eq!(signed_frequency(7, 8), -0.125);
    }
}
