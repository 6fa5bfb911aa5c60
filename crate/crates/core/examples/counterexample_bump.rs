//! Two bump mixtures that share the root of the first two moments but
//! have their modes in different balls. Prints the certificate as JSON.

use modal_lab::complexity::certify;
use modal_lab::elicitation::PolynomialIdentification;
use modal_lab::Family;

fn main() -> modal_lab::Result<()> {
    let v = PolynomialIdentification::moments(2);
    let cert = certify(&v, Family::Bump, 3, 0.5)?;
    println!("{}", cert.to_json()?);
    eprintln!(
        "report {:?}: mode {:.4} (ball {}) vs {:.4} (ball {}), alpha {:.4}, beta {:.4}, case {}",
        cert.report,
        cert.mode_original,
        cert.ball_original,
        cert.mode_perturbed,
        cert.ball_perturbed,
        cert.alpha,
        cert.beta,
        cert.case_tag
    );
    Ok(())
}
