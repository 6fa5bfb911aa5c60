//! Monte Carlo study of the empirical modal midpoint.
//!
//! Each trial draws `n` points from a mixture, takes the lowest maximizer of
//! the empirical window count `c(r) = #{i : |r - y_i| ≤ ε}` as the estimate,
//! and is scored against the global mode `m0`, the local modal midpoint
//! `x_ε` tracking it, and the competing local maximum `m1`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mixtures::{MixtureDensity, UNIQUENESS_TOL};

/// The half-widths studied by default.
pub const DEFAULT_EPS: [f64; 6] = [0.5, 0.25, 0.1, 0.05, 0.025, 0.001];

/// Sorted sample with the seed it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    values: Vec<f64>,
    seed: u64,
}

impl SampleBatch {
    /// Sorts `values`; NaNs are rejected by the sort's total order placing
    /// them last, so callers should not pass them.
    pub fn new(mut values: Vec<f64>, seed: u64) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values, seed }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `c(x)`: number of points within `eps` of `x` (closed interval).
    pub fn count_within(&self, x: f64, eps: f64) -> usize {
        let lo = self.values.partition_point(|&y| y < x - eps);
        let hi = self.values.partition_point(|&y| y <= x + eps);
        hi.saturating_sub(lo)
    }
}

/// Estimate and its window count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalEstimate {
    pub location: f64,
    pub count: usize,
}

/// Lowest maximizer of `c(r)` by a two-pointer sweep.
///
/// For a window `y_i..=y_j` with `y_j - y_i ≤ 2ε` the points are all covered
/// exactly for `r ∈ [y_j - ε, y_i + ε]`, so the lowest maximizer is the
/// smallest `y_j - ε` over windows of maximal size.
pub fn empirical_modal_estimate(batch: &SampleBatch, eps: f64) -> Result<ModalEstimate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(domain(format!("eps must be positive, got {eps}")));
    }
    let y = batch.values();
    if y.is_empty() {
        return Err(domain("empty sample batch"));
    }
    let width = 2.0 * eps;
    let mut best_count = 0;
    let mut best = f64::INFINITY;
    let mut j = 0;
    for i in 0..y.len() {
        if j < i {
            j = i;
        }
        while j + 1 < y.len() && y[j + 1] - y[i] <= width {
            j += 1;
        }
        let count = j - i + 1;
        let r = y[j] - eps;
        if count > best_count || (count == best_count && r < best) {
            best_count = count;
            best = r;
        }
    }
    Ok(ModalEstimate {
        location: best,
        count: best_count,
    })
}

/// Lowest maximizer of the empirical window count.
pub fn empirical_modal_midpoint(batch: &SampleBatch, eps: f64) -> Result<f64> {
    empirical_modal_estimate(batch, eps).map(|e| e.location)
}

/// `c(x)` on `steps` evenly spaced points of `[lo, hi]`.
pub fn count_curve(batch: &SampleBatch, eps: f64, lo: f64, hi: f64, steps: usize) -> Vec<(f64, usize)> {
    if steps == 0 {
        return Vec::new();
    }
    if steps == 1 {
        return vec![(lo, batch.count_within(lo, eps))];
    }
    crate::optimize::linspace(lo, hi, steps)
        .into_iter()
        .map(|x| (x, batch.count_within(x, eps)))
        .collect()
}

/// Write a count curve as two-column CSV.
pub fn write_count_curve<W: Write>(curve: &[(f64, usize)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "count"]).map_err(csv_err)?;
    for (x, c) in curve {
        w.write_record([x.to_string(), c.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Global mode and the other local maximum of a two-peaked density.
pub fn true_local_maxima(d: &MixtureDensity) -> Result<(f64, f64)> {
    let maxima = d.local_maxima();
    if maxima.len() != 2 {
        return Err(domain(format!(
            "expected exactly two local maxima, found {}",
            maxima.len()
        )));
    }
    let (m0, v0) = maxima[0];
    let (m1, v1) = maxima[1];
    if v0 - v1 <= UNIQUENESS_TOL * v0 {
        return Err(domain(format!(
            "local maxima at {m0} and {m1} are tied ({v0} vs {v1})"
        )));
    }
    Ok((m0, m1))
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mixture: MixtureDensity,
    pub eps_list: Vec<f64>,
    pub trials: usize,
    pub n: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mixture: MixtureDensity::benchmark(),
            eps_list: DEFAULT_EPS.to_vec(),
            trials: 1000,
            n: 10_000,
            master_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if self.eps_list.is_empty() {
            return Err(domain("eps list is empty"));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(domain(format!("eps values must be positive, got {e}")));
        }
        if !self.mixture.is_normalized() {
            return Err(domain("experiment mixture must be normalized"));
        }
        Ok(())
    }
}

/// One row of the summary table, in its column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub eps: f64,
    pub x_eps: f64,
    pub mse_mode: f64,
    pub mse_modal: f64,
    pub versus_mode: usize,
    pub versus_modal: usize,
    pub minimal_loss: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial, a pure function of its coordinates.
pub fn trial_seed(master_seed: u64, eps_index: usize, trial_index: usize) -> u64 {
    let a = splitmix64(master_seed);
    let b = splitmix64(a ^ (eps_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(b ^ trial_index as u64)
}

/// Run every `(ε, trial)` pair and summarize per ε.
///
/// Trials run in parallel; outcomes are collected in trial order and reduced
/// sequentially, so the rows do not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<Table1Row>> {
    config.validate()?;
    let d = &config.mixture;
    let (m0, m1) = true_local_maxima(d)?;
    let mut rows = Vec::with_capacity(config.eps_list.len());
    for (k, &eps) in config.eps_list.iter().enumerate() {
        let x_eps = d.local_modal_midpoint(eps, m0)?;
        let outcomes: Vec<ModalEstimate> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.master_seed, k, t));
                let batch = SampleBatch::new(d.draw(config.n, &mut rng), trial_seed(config.master_seed, k, t));
                empirical_modal_estimate(&batch, eps)
            })
            .collect::<Result<_>>()?;
        let trials = config.trials as f64;
        let mut sq_mode = 0.0;
        let mut sq_modal = 0.0;
        let mut versus_mode = 0;
        let mut versus_modal = 0;
        let mut minimal_loss = f64::INFINITY;
        for e in &outcomes {
            let x = e.location;
            sq_mode += (x - m0).powi(2);
            sq_modal += (x - x_eps).powi(2);
            if (x - m0).abs() < (x - m1).abs() {
                versus_mode += 1;
            }
            if (x - x_eps).abs() < (x - m1).abs() {
                versus_modal += 1;
            }
            minimal_loss = minimal_loss.min(1.0 - e.count as f64 / config.n as f64);
        }
        rows.push(Table1Row {
            eps,
            x_eps,
            mse_mode: sq_mode / trials,
            mse_modal: sq_modal / trials,
            versus_mode,
            versus_modal,
            minimal_loss,
        });
    }
    Ok(rows)
}

/// Published results of the study on the benchmark mixture, bundled with
/// the crate for comparison.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReferenceTable {
    pub origin: String,
    pub local_max_low: f64,
    pub local_max_high: f64,
    pub rows: Vec<Table1Row>,
}

impl ReferenceTable {
    pub fn row(&self, eps: f64) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.eps == eps)
    }
}

pub fn reference_table() -> ReferenceTable {
    toml::from_str(include_str!("../data/reference_values.toml"))
        .expect("bundled reference values parse")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Write rows as CSV with header
/// `eps,x_eps,mse_mode,mse_modal,versus_mode,versus_modal,minimal_loss`.
pub fn write_table_csv<W: Write>(rows: &[Table1Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(v: &[f64]) -> SampleBatch {
        SampleBatch::new(v.to_vec(), 0)
    }

    #[test]
    fn single_point_takes_lowest_maximizer() {
        assert_eq!(empirical_modal_midpoint(&batch(&[0.0]), 1.0).unwrap(), -1.0);
    }

    #[test]
    fn small_batches_from_brute_force() {
        let r = empirical_modal_midpoint(&batch(&[0.0, 0.1, 5.0]), 0.25).unwrap();
        assert!((r - (-0.15)).abs() < 1e-15);
        let r = empirical_modal_midpoint(&batch(&[-1.0, 0.0, 0.2, 0.3, 1.0]), 0.2).unwrap();
        assert!((r - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bad_eps_rejected() {
        assert!(empirical_modal_midpoint(&batch(&[0.0]), 0.0).is_err());
    }

    #[test]
    fn single_point_curve() {
        let curve = count_curve(&batch(&[0.0]), 1.0, -2.0, 2.0, 9);
        let counts: Vec<usize> = curve.iter().map(|c| c.1).collect();
        assert_eq!(counts, vec![0, 0, 1, 1, 1, 1, 1, 0, 0]);
    }

    #[test]
    fn benchmark_local_maxima() {
        let (m0, m1) = true_local_maxima(&MixtureDensity::benchmark()).unwrap();
        assert!((m0 + 1.987047).abs() < 1e-5);
        assert!((m1 - 2.0).abs() < 1e-4);
    }

    #[test]
    fn local_maxima_count_errors() {
        let single = MixtureDensity::gaussian(&[(0.0, 1.0)], &[1.0]).unwrap();
        assert!(matches!(true_local_maxima(&single), Err(Error::Domain(_))));
        let tied = MixtureDensity::gaussian(&[(-3.0, 0.5), (3.0, 0.5)], &[0.5, 0.5]).unwrap();
        assert!(matches!(true_local_maxima(&tied), Err(Error::Domain(_))));
    }

    #[test]
    fn single_sample_trial() {
        let cfg = ExperimentConfig {
            trials: 1,
            n: 1,
            eps_list: vec![0.3],
            ..Default::default()
        };
        let rows = run_experiment(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(0, 0, 0));
        let y = cfg.mixture.draw(1, &mut rng)[0];
        let (m0, _) = true_local_maxima(&cfg.mixture).unwrap();
        assert_eq!(rows[0].mse_mode, (y - 0.3 - m0).powi(2));
        assert_eq!(rows[0].minimal_loss, 0.0);
    }

    #[test]
    fn config_validation() {
        let bad = ExperimentConfig {
            eps_list: vec![0.1, -0.2],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_header_order() {
        let row = Table1Row {
            eps: 0.5,
            x_eps: -1.0,
            mse_mode: 1.0,
            mse_modal: 2.0,
            versus_mode: 3,
            versus_modal: 4,
            minimal_loss: 0.5,
        };
        let mut buf = Vec::new();
        write_table_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "eps,x_eps,mse_mode,mse_modal,versus_mode,versus_modal,minimal_loss\n"
        ));
    }
}
