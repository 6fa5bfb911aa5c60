//! Bayes acts of the squared loss and of the modal loss
//! `1{|y - r| > eps}` on the benchmark mixture. As eps shrinks the modal
//! Bayes act settles on the mode.

use modal_lab::elicitation::{bayes_act, ModalLoss, SquaredLoss};
use modal_lab::MixtureDensity;

fn main() -> modal_lab::Result<()> {
    let d = MixtureDensity::benchmark();
    println!("mean            {:.6}", d.mean()?);
    println!("squared loss    {:.6}", bayes_act(&SquaredLoss::mean(), &d, None)?[0]);
    println!("mode            {:.6}", d.mode()?.location);
    for eps in [1.0, 0.5, 0.25, 0.1, 0.01] {
        let act = bayes_act(&ModalLoss::new(eps)?, &d, None)?[0];
        println!("modal eps {eps:<5} {act:.6}  (modal midpoint {:.6})", d.modal_midpoint(eps)?);
    }
    Ok(())
}
