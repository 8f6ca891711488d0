// HSV colour histogram of a two-tone image: the mass splits between the
// hue bins of the two colours.

use visdiv::features::color_hsv;
use visdiv::pixels::PixelGrid;

pub fn run_example() -> visdiv::Result<()> {
    let img = PixelGrid::rgb_from_fn(64, 64, |x, _| if x < 48 { [220, 30, 30] } else { [30, 30, 220] });
    let fv = color_hsv("two_tone", &img);
    println!("{} dims, total mass {:.3}", fv.dim, fv.values.iter().sum::<f64>());
    let mut bins: Vec<(usize, f64)> = fv.values.iter().copied().enumerate().filter(|b| b.1 > 0.0).collect();
    bins.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (i, v) in bins {
        println!("bin {i:2}: {v:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
