// GIST scene descriptor from a Gabor filter bank: a grating responds most
// in the orientation matching its own.

use visdiv::features::gist::{channel_index, GistBank, GRID, ORIENTATIONS, SCALES};
use visdiv::pixels::PixelGrid;

pub fn run_example() -> visdiv::Result<()> {
    let img = PixelGrid::gray_from_fn(64, 64, |x, _| (127.5 + 127.5 * (x as f64 * 0.6).sin()) as u8);
    let bank = GistBank::new(64, 64);
    let fv = bank.describe("grating", &img);
    println!("GIST: {} dims", fv.dim);
    for o in 0..ORIENTATIONS {
        let energy: f64 = (0..SCALES)
            .flat_map(|s| (0..GRID * GRID).map(move |c| (s, c)))
            .map(|(s, c)| fv.values[channel_index(s, o, c)])
            .sum();
        println!("orientation {o}: {energy:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
