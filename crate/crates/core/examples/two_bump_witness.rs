//! The two-bump argument applied to a few scalar identification functions.
//! Any `V` vanishing on the bump at 0 and on `(2/3)ψ_0 + (1/3)ψ_4` also
//! vanishes on the bump at 4, whose mode is 4.

use modal_lab::complexity::lemma1_witness;
use modal_lab::elicitation::{FnIdentification, Identification, PolynomialIdentification};

fn main() -> modal_lab::Result<()> {
    let candidates: Vec<Box<dyn Identification>> = vec![
        Box::new(PolynomialIdentification::mean()),
        Box::new(FnIdentification::median()),
        Box::new(
            FnIdentification::new(1, "(y - r) 1{y < r + 2}", |r, y| {
                vec![if y < r[0] + 2.0 { y - r[0] } else { 0.0 }]
            })
            .with_breakpoints(|r| vec![r[0] + 2.0]),
        ),
    ];
    for v in &candidates {
        println!("{:<24} {:?}", v.description(), lemma1_witness(v.as_ref())?);
    }
    Ok(())
}
