//! On mixtures of bumps of half-width eps placed on the lattice 4·eps·Z
//! the mode and the modal midpoint of half-width eps coincide.

use modal_lab::complexity::corollary_check;
use modal_lab::MixtureDensity;

fn main() -> modal_lab::Result<()> {
    let eps = 0.3;
    let centers = [0.0, 4.0 * eps, 12.0 * eps, 20.0 * eps];
    let weights = [0.2, 0.35, 0.15, 0.3];
    let d = MixtureDensity::bump(&centers, eps, &weights)?;
    println!("mode           {:.12}", d.mode()?.location);
    println!("modal midpoint {:.12}", d.modal_midpoint(eps)?);
    println!("check          {}", corollary_check(&d, eps)?);
    Ok(())
}
