//! Monte Carlo study of the empirical modal midpoint on the benchmark
//! mixture `0.75 N(2, 1.5²) + 0.25 N(-2, 0.5²)`, with a smaller number of
//! trials than the default so it finishes quickly.

use modal_lab::simulation::{reference_table, run_experiment, write_table_csv, ExperimentConfig};

fn main() -> modal_lab::Result<()> {
    let config = ExperimentConfig {
        trials: 200,
        ..ExperimentConfig::default()
    };
    let rows = run_experiment(&config)?;
    write_table_csv(&rows, std::io::stdout())?;

    let reference = reference_table();
    println!("\nreference x_eps ({}):", reference.origin);
    for row in &rows {
        if let Some(r) = reference.row(row.eps) {
            println!("  eps {:<6} computed {:.11}  reference {:.11}", row.eps, row.x_eps, r.x_eps);
        }
    }
    Ok(())
}
