// SURF interest points, a k-means visual vocabulary, and bag-of-words
// histograms for a few procedural images.

use visdiv::features::{bow_encode, build_codebook, detect_and_describe, KMeansOptions, SurfOptions};
use visdiv::pixels::PixelGrid;

fn blobs(seed: usize) -> PixelGrid {
    PixelGrid::gray_from_fn(96, 96, |x, y| {
        let mut v = 40.0;
        for k in 0..4 {
            let cx = 16.0 + ((seed * 7 + k * 23) % 64) as f64;
            let cy = 16.0 + ((seed * 13 + k * 31) % 64) as f64;
            let r = 4.0 + (k % 3) as f64 * 3.0;
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            v += 200.0 * (-d2 / (2.0 * r * r)).exp();
        }
        v.min(255.0) as u8
    })
}

pub fn run_example() -> visdiv::Result<()> {
    let opts = SurfOptions::default();
    let images: Vec<PixelGrid> = (0..4).map(blobs).collect();
    let points: Vec<_> = images.iter().map(|img| detect_and_describe(img, &opts)).collect();
    let training: Vec<Vec<f64>> = points.iter().flatten().map(|p| p.descriptor.clone()).collect();
    println!("{} descriptors from {} images", training.len(), images.len());
    let book = build_codebook(&training, &KMeansOptions::new(8, 1))?;
    println!("codebook k={}, inertia {:.3} -> {:.3}", book.k, book.inertia_history[0], book.inertia_history.last().unwrap());
    for (i, p) in points.iter().enumerate() {
        let h = bow_encode(&format!("img{i}"), p, &book)?;
        let words: Vec<String> = h.values.iter().map(|v| format!("{v:.2}")).collect();
        println!("img{i}: {} points, histogram [{}]", p.len(), words.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
