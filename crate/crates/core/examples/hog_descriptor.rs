// Histogram of oriented gradients: vertical stripes put their gradient
// energy in the horizontal-gradient bin.

use visdiv::features::hog;
use visdiv::features::hog::bin_totals;
use visdiv::pixels::PixelGrid;

pub fn run_example() -> visdiv::Result<()> {
    let stripes = PixelGrid::gray_from_fn(64, 64, |x, _| if (x / 4) % 2 == 0 { 20 } else { 230 });
    let fv = hog("stripes", &stripes)?;
    println!("HOG: {} dims", fv.dim);
    for (bin, total) in bin_totals(&fv).iter().enumerate() {
        println!("orientation bin {bin}: {total:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
