//! The same construction with unit-height Gaussian components, and the
//! modal midpoints of both densities at a small half-width.

use modal_lab::complexity::{certify, modal_displacement};
use modal_lab::elicitation::PolynomialIdentification;
use modal_lab::Family;

fn main() -> modal_lab::Result<()> {
    let v = PolynomialIdentification::moments(3);
    let cert = certify(&v, Family::Gaussian, 6, 1.0)?;
    println!("schedule heights {:?}", cert.schedule.values());
    println!("report {:?}", cert.report);
    println!("original weights  {:?}", cert.original.weights);
    println!("perturbed weights {:?}", cert.perturbed.weights);
    println!(
        "modes {:.5} (ball {}) and {:.5} (ball {})",
        cert.mode_original, cert.ball_original, cert.mode_perturbed, cert.ball_perturbed
    );
    let check = cert.reverify(&v)?;
    println!("independent re-check: residual {:?}, passed {}", check.residual, check.passed);
    let shift = modal_displacement(&cert, 0.05)?;
    println!(
        "modal midpoints at eps 0.05: {:?} and {:?}, displaced {}",
        shift.midpoint_original, shift.midpoint_perturbed, shift.displaced
    );
    Ok(())
}
