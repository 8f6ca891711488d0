//! 8-bit pixel buffers, decoding, grayscale conversion and resampling.

use std::path::Path;

use crate::error::{Error, Result};

/// An interleaved 8-bit image with one (gray) or three (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGrid {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl PixelGrid {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::validation(format!(
                "unsupported channel count {channels}; expected 1 or 3"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::validation(format!(
                "buffer length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, 1, data)
    }

    pub fn from_rgb(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, 3, data)
    }

    /// Build a grayscale image from a closure evaluated at each `(x, y)`.
    pub fn gray_from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    /// Build an RGB image from a closure evaluated at each `(x, y)`.
    pub fn rgb_from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 3,
            data,
        }
    }

    /// Decode any supported file format into canonical 8-bit RGB.
    pub fn decode(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Self::from_rgb(w as usize, h as usize, rgb.into_raw())
    }

    /// Write the image as PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let color = if self.channels == 3 {
            image::ExtendedColorType::Rgb8
        } else {
            image::ExtendedColorType::L8
        };
        image::save_buffer_with_format(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            color,
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn is_rgb(&self) -> bool {
        self.channels == 3
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    /// Gray value at `(x, y)`. Panics on RGB images.
    #[inline]
    pub fn gray(&self, x: usize, y: usize) -> u8 {
        debug_assert_eq!(self.channels, 1);
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        if self.channels == 1 {
            let v = self.data[y * self.width + x];
            return [v, v, v];
        }
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Grayscale via `Y = 0.299 R + 0.587 G + 0.114 B`, rounded half-up.
    pub fn to_gray(&self) -> PixelGrid {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect();
        PixelGrid {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    pub fn to_rgb(&self) -> PixelGrid {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        PixelGrid {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    /// Resample to `width` x `height`. Each axis is handled independently:
    /// area averaging when shrinking, bilinear (pixel-centre aligned) when
    /// growing, and a straight copy when the size is unchanged. Results are
    /// rounded half-up.
    pub fn resize(&self, width: usize, height: usize) -> Result<PixelGrid> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("cannot resample a zero-area image"));
        }
        if width == 0 || height == 0 {
            return Err(Error::validation("target size must be non-zero"));
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let c = self.channels;
        let wx = axis_weights(self.width, width);
        let wy = axis_weights(self.height, height);

        // horizontal pass
        let mut tmp = vec![0.0f64; width * self.height * c];
        for y in 0..self.height {
            let row = &self.data[y * self.width * c..(y + 1) * self.width * c];
            for (x, taps) in wx.iter().enumerate() {
                for ch in 0..c {
                    let mut acc = 0.0;
                    for &(i, w) in taps {
                        acc += w * f64::from(row[i * c + ch]);
                    }
                    tmp[(y * width + x) * c + ch] = acc;
                }
            }
        }
        // vertical pass
        let mut data = vec![0u8; width * height * c];
        for (y, taps) in wy.iter().enumerate() {
            for x in 0..width {
                for ch in 0..c {
                    let mut acc = 0.0;
                    for &(i, w) in taps {
                        acc += w * tmp[(i * width + x) * c + ch];
                    }
                    data[(y * width + x) * c + ch] = round_half_up(acc);
                }
            }
        }
        Ok(PixelGrid {
            width,
            height,
            channels: c,
            data,
        })
    }

    pub fn rotate180(&self) -> PixelGrid {
        let c = self.channels;
        let mut data = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(c).rev() {
            data.extend_from_slice(px);
        }
        PixelGrid {
            width: self.width,
            height: self.height,
            channels: c,
            data,
        }
    }

    /// Rotate 90 degrees counter-clockwise (as displayed with y pointing down).
    pub fn rotate90_ccw(&self) -> PixelGrid {
        let (w, h, c) = (self.width, self.height, self.channels);
        let mut data = vec![0u8; self.data.len()];
        // new size h x w; new(x', y') = old(w - 1 - y', x')
        for ny in 0..w {
            for nx in 0..h {
                let (ox, oy) = (w - 1 - ny, nx);
                let src = (oy * w + ox) * c;
                let dst = (ny * h + nx) * c;
                data[dst..dst + c].copy_from_slice(&self.data[src..src + c]);
            }
        }
        PixelGrid {
            width: h,
            height: w,
            channels: c,
            data,
        }
    }
}

/// Resize to the canonical `side` x `side` RGB working image.
pub fn normalize_image(img: &PixelGrid, side: usize) -> Result<PixelGrid> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::validation("zero-area image"));
    }
    img.to_rgb().resize(side, side)
}

#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    // integer form of 0.299/0.587/0.114 with +0.5 for half-up rounding
    let y = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((y + 500) / 1000) as u8
}

#[inline]
fn round_half_up(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn axis_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    use std::cmp::Ordering;
    match dst.cmp(&src) {
        Ordering::Equal => (0..dst).map(|i| vec![(i, 1.0)]).collect(),
        Ordering::Less => {
            let scale = src as f64 / dst as f64;
            (0..dst)
                .map(|j| {
                    let lo = j as f64 * scale;
                    let hi = (j + 1) as f64 * scale;
                    let first = lo.floor() as usize;
                    let last = (hi.ceil() as usize).min(src);
                    (first..last)
                        .filter_map(|i| {
                            let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                            (overlap > 0.0).then_some((i, overlap / scale))
                        })
                        .collect()
                })
                .collect()
        }
        Ordering::Greater => {
            let scale = src as f64 / dst as f64;
            (0..dst)
                .map(|j| {
                    let pos = ((j as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                    let i0 = pos.floor() as usize;
                    let t = pos - i0 as f64;
                    let i1 = (i0 + 1).min(src - 1);
                    if t == 0.0 || i0 == i1 {
                        vec![(i0, 1.0)]
                    } else {
                        vec![(i0, 1.0 - t), (i1, t)]
                    }
                })
                .collect()
        }
    }
}
