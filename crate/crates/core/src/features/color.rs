//! HSV colour distribution.

use super::{normalize_histogram, Attribute, FeatureVector};
use crate::pixels::PixelGrid;

pub const HUE_BINS: usize = 32;
pub const SAT_BINS: usize = 32;
pub const VAL_BINS: usize = 32;
pub const COLOR_DIM: usize = HUE_BINS + SAT_BINS + VAL_BINS;

/// Convert 8-bit RGB to (hue in degrees `[0, 360)`, saturation, value).
/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (rf, gf, bf) = (f64::from(r), f64::from(g), f64::from(b));
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;
    let v = max / 255.0;
    let s = if max == 0.0 { 0.0 } else { delta / max };
    if delta == 0.0 {
        return (0.0, s, v);
    }
    let h = if max == rf {
        60.0 * ((gf - bf) / delta).rem_euclid(6.0)
    } else if max == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    (if h >= 360.0 { h - 360.0 } else { h }, s, v)
}

#[inline]
fn bin(value: f64, range: f64, bins: usize) -> usize {
    ((value / range * bins as f64) as usize).min(bins - 1)
}

/// Concatenated hue/saturation/value histograms, each summing to one.
pub fn color_hsv(image_id: &str, img: &PixelGrid) -> FeatureVector {
    let mut hist = vec![0.0; COLOR_DIM];
    let (hue, rest) = hist.split_at_mut(HUE_BINS);
    let (sat, val) = rest.split_at_mut(SAT_BINS);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let [r, g, b] = img.rgb(x, y);
            let (h, s, v) = rgb_to_hsv(r, g, b);
            hue[bin(h, 360.0, HUE_BINS)] += 1.0;
            sat[bin(s, 1.0, SAT_BINS)] += 1.0;
            val[bin(v, 1.0, VAL_BINS)] += 1.0;
        }
    }
    normalize_histogram(hue);
    normalize_histogram(sat);
    normalize_histogram(val);
    FeatureVector {
        image_id: image_id.to_string(),
        attribute: Attribute::Color,
        dim: COLOR_DIM,
        values: hist,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(c: [u8; 3]) -> PixelGrid {
        PixelGrid::rgb_from_fn(8, 8, |_, _| c)
    }

    #[test]
    fn hsv_conversion_reference_points() {
        assert_eq!(rgb_to_hsv(255, 0, 0), (0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv(0, 255, 0), (120.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv(0, 0, 255), (240.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv(0, 0, 0), (0.0, 0.0, 0.0));
        let (h, s, v) = rgb_to_hsv(255, 0, 128);
        assert!(h > 300.0 && h < 360.0);
        assert_eq!((s, v), (1.0, 1.0));
    }

    #[test]
    fn pure_red() {
        let f = color_hsv("r", &solid([255, 0, 0]));
        assert_eq!(f.dim, 96);
        assert_eq!(f.values[0], 1.0);
        assert_eq!(f.values[HUE_BINS + SAT_BINS - 1], 1.0);
        assert_eq!(f.values[COLOR_DIM - 1], 1.0);
        assert_eq!(f.values.iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn pure_black() {
        let f = color_hsv("k", &solid([0, 0, 0]));
        assert_eq!(f.values[0], 1.0);
        assert_eq!(f.values[HUE_BINS], 1.0);
        assert_eq!(f.values[HUE_BINS + SAT_BINS], 1.0);
    }

    #[test]
    fn half_red_half_green() {
        let img = PixelGrid::rgb_from_fn(8, 8, |x, _| if x < 4 { [255, 0, 0] } else { [0, 255, 0] });
        let f = color_hsv("rg", &img);
        // 120 degrees / 11.25 degrees per bin = 10.67 -> bin 10
        let mut expected = vec![0.0; HUE_BINS];
        expected[0] = 0.5;
        expected[10] = 0.5;
        assert_eq!(&f.values[..HUE_BINS], expected.as_slice());
    }

    #[test]
    fn grayscale_input_is_accepted() {
        let img = PixelGrid::gray_from_fn(4, 4, |x, y| (x * 60 + y) as u8);
        let f = color_hsv("g", &img);
        // all achromatic: hue and saturation mass in bin 0
        assert_eq!(f.values[0], 1.0);
        assert_eq!(f.values[HUE_BINS], 1.0);
    }
}
