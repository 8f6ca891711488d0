// Co-occurrence statistics and local binary patterns for a smooth ramp and
// a checkerboard.

use visdiv::features::{glcm_stats, lbph, texture};
use visdiv::pixels::PixelGrid;

pub fn run_example() -> visdiv::Result<()> {
    let ramp = PixelGrid::gray_from_fn(64, 64, |x, _| (x * 4) as u8);
    let checker = PixelGrid::gray_from_fn(64, 64, |x, y| if (x / 2 + y / 2) % 2 == 0 { 30 } else { 220 });
    for (name, img) in [("ramp", &ramp), ("checker", &checker)] {
        let g = glcm_stats(img);
        println!(
            "{name}: contrast {:.3}, correlation {:.3}, energy {:.3}, homogeneity {:.3} (offset 0)",
            g.values[0], g.values[1], g.values[2], g.values[3]
        );
        let hist = lbph(img)?;
        let peak = hist.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).expect("256 bins");
        println!("{name}: most frequent LBP code {} ({:.1}% of pixels)", peak.0, 100.0 * peak.1);
        println!("{name}: Texture vector has {} dims", texture(name, img)?.dim);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
