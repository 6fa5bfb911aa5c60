//! Neighbour-leakage bounds on unit-height Gaussian mixtures: the density
//! at a center exceeds its height by at most gamma times the others, and a
//! sufficiently dominant component holds the mode in its ball.

use modal_lab::complexity::{claims_check, gaussian_scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> modal_lab::Result<()> {
    let scenario = gaussian_scenario(8)?;
    println!("gamma = {:.3e}, spacing = {:.4}", scenario.gamma(), scenario.center(1));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let mut h: Vec<f64> = (0..=8).map(|_| rng.random::<f64>()).collect();
        h[rng.random_range(0..=8)] += 1.0;
        let report = claims_check(&h, &scenario)?;
        let dominant: Vec<usize> = report
            .entries
            .iter()
            .filter(|e| e.dominant_premise)
            .map(|e| e.index)
            .collect();
        println!(
            "mode {:>8.4}  dominant {:?}  violations {}",
            report.mode,
            dominant,
            report.violations()
        );
    }
    Ok(())
}
