//! Window counts `#{i : |y_i - x| <= eps}` along a grid for one sample of
//! the benchmark mixture, written as CSV.

use modal_lab::simulation::{count_curve, empirical_modal_estimate, write_count_curve};
use modal_lab::MixtureDensity;

fn main() -> modal_lab::Result<()> {
    let batch = MixtureDensity::benchmark().sample(1000, 7)?;
    let eps = 0.1;
    let best = empirical_modal_estimate(&batch, eps)?;
    eprintln!("empirical modal midpoint {:.6} covering {} points", best.location, best.count);
    write_count_curve(&count_curve(&batch, eps, -4.0, 6.0, 200), std::io::stdout())
}
