// Cosine-similarity eigenspectra of a tight and a spread-out image set.
// A homogeneous set concentrates its spectrum in the first eigenvalue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visdiv::diversity::{eigenspectrum, similarity_matrix};
use visdiv::features::Attribute;

pub fn run_example() -> visdiv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base: Vec<f64> = (0..32).map(|_| rng.random_range(0.0..1.0)).collect();
    let tight: Vec<Vec<f64>> =
        (0..10).map(|_| base.iter().map(|v| v + rng.random_range(-0.05..0.05)).collect()).collect();
    let spread: Vec<Vec<f64>> = (0..10).map(|_| (0..32).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    for (lemma, set) in [("tight", &tight), ("spread", &spread)] {
        let m = similarity_matrix(lemma, Attribute::Color, set)?;
        let s = eigenspectrum(&m)?;
        let total: f64 = s.eigenvalues.iter().sum();
        let shown: Vec<String> = s.eigenvalues.iter().take(4).map(|v| format!("{v:.3}")).collect();
        println!("{lemma}: trace {:.3}, leading eigenvalues [{}], first share {:.1}%", m.trace(), shown.join(", "), 100.0 * s.eigenvalues[0] / total);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
