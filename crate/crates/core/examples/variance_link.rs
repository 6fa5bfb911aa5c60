//! Variance is not elicitable on its own but is a function of the mean and
//! second moment. Compares the recovered variance with the closed form.

use modal_lab::elicitation::variance_link_demo;
use modal_lab::MixtureDensity;

fn main() -> modal_lab::Result<()> {
    let parts = [(0.5, -1.0, 0.7), (0.3, 2.0, 1.2), (0.2, 4.0, 0.4)];
    let params: Vec<(f64, f64)> = parts.iter().map(|p| (p.1, p.2)).collect();
    let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let d = MixtureDensity::gaussian(&params, &weights)?;

    let mean: f64 = parts.iter().map(|(w, m, _)| w * m).sum();
    let second: f64 = parts.iter().map(|(w, m, s)| w * (s * s + m * m)).sum();
    let got = variance_link_demo(&d)?;
    println!("recovered {got:.10}, closed form {:.10}", second - mean * mean);
    Ok(())
}
