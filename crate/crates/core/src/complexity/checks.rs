//! The one-dimensional witness, the leakage claims for unit-height
//! Gaussians, and the mode/modal-midpoint agreement on separated bumps.

use serde::Serialize;

use crate::elicitation::{expected_identification, Identification};
use crate::error::{domain, Result};
use crate::mixtures::{Family, MixtureDensity};
use crate::optimize::{golden_max, linspace};

use super::schedule::{Geometry, HeightSchedule};

/// Tolerance for "this expectation vanishes".
pub const WITNESS_TOL: f64 = 1e-8;

/// Outcome of [`lemma1_witness`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Lemma1Outcome {
    /// `E V(0, Y) ≠ 0` under the bump at 0, so `V` does not identify the
    /// mode there to begin with.
    NotACandidate { residual_at_center: f64 },
    /// `V` vanishes on the bump at 0 but not on `(2/3)ψ_0 + (1/3)ψ_4`,
    /// whose mode is also 0.
    PremiseFails { residual_on_mixture: f64 },
    /// `V(0, ·)` vanishes on both, hence by linearity on the bump at 4,
    /// whose mode is 4.
    Contradiction {
        residual_on_shifted: f64,
        mode_center: f64,
        mode_shifted: f64,
        mode_gap: f64,
    },
}

/// Runs the two-bump argument against a scalar identification function:
/// with `p = (2/3)ψ_{0,1} + (1/3)ψ_{4,1}`, `E_p V(0,Y) = (2/3)E_{ψ_0}V(0,Y) +
/// (1/3)E_{ψ_4}V(0,Y)`, so a `V` vanishing on `ψ_0` and `p` also vanishes on
/// `ψ_4`, whose mode is 4.
pub fn lemma1_witness(v: &dyn Identification) -> Result<Lemma1Outcome> {
    if v.dim() != 1 {
        return Err(domain(format!("the witness needs a scalar V, got dimension {}", v.dim())));
    }
    let center = MixtureDensity::bump(&[0.0], 1.0, &[1.0])?;
    let e0 = expected_identification(v, &center, &[0.0])?[0];
    if e0.abs() > WITNESS_TOL {
        return Ok(Lemma1Outcome::NotACandidate { residual_at_center: e0 });
    }
    let mixed = MixtureDensity::bump(&[0.0, 4.0], 1.0, &[2.0 / 3.0, 1.0 / 3.0])?;
    let eh = expected_identification(v, &mixed, &[0.0])?[0];
    if eh.abs() > WITNESS_TOL {
        return Ok(Lemma1Outcome::PremiseFails { residual_on_mixture: eh });
    }
    let shifted = MixtureDensity::bump(&[4.0], 1.0, &[1.0])?;
    let e4 = expected_identification(v, &shifted, &[0.0])?[0];
    let mode_center = center.mode()?.location;
    let mode_shifted = shifted.mode()?.location;
    Ok(Lemma1Outcome::Contradiction {
        residual_on_shifted: e4,
        mode_center,
        mode_shifted,
        mode_gap: mode_shifted - mode_center,
    })
}

/// Checks on one component of [`claims_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimEntry {
    pub index: usize,
    /// `q[h](x_i)`.
    pub value_at_center: f64,
    /// `max_{B_σ(x_i)} q[h]`.
    pub ball_max: f64,
    /// `h_i + γ Σ_{j≠i} h_j`.
    pub upper: f64,
    pub bounds_hold: bool,
    /// `h_i > max_{j≠i} h_j + γ Σ_k h_k`; mode must be in the ball.
    pub dominant_premise: bool,
    /// Some `h_j > h_i + γ Σ_{k≠i} h_k`; mode must be outside the ball.
    pub dominated_premise: bool,
    pub mode_in_ball: bool,
}

impl ClaimEntry {
    pub fn violations(&self) -> usize {
        usize::from(!self.bounds_hold)
            + usize::from(self.dominant_premise && !self.mode_in_ball)
            + usize::from(self.dominated_premise && self.mode_in_ball)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimsReport {
    pub heights: Vec<f64>,
    pub mode: f64,
    pub entries: Vec<ClaimEntry>,
}

impl ClaimsReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().map(ClaimEntry::violations).sum()
    }
}

/// Evaluates the height/leakage bounds for `q[h] = Σ h_i·φ(· - C i)` with
/// unit-height Gaussians `φ` on the geometry of `scenario`.
pub fn claims_check(h: &[f64], scenario: &HeightSchedule) -> Result<ClaimsReport> {
    let Geometry::Gaussian { sigma, gamma, .. } = scenario.geometry() else {
        return Err(domain("claims apply to gaussian scenarios"));
    };
    if h.len() != scenario.values().len() {
        return Err(domain(format!(
            "{} heights for a scenario with {} components",
            h.len(),
            scenario.values().len()
        )));
    }
    let q = scenario.density_with(h)?;
    let mode = q.mode()?.location;
    let total: f64 = h.iter().sum();
    let slack = |x: f64| x * (1.0 + 1e-12) + 1e-300;
    let entries = (0..h.len())
        .map(|i| {
            let xi = scenario.center(i);
            let value_at_center = q.pdf(xi);
            let ball_max = ball_maximum(&q, xi - sigma, xi + sigma);
            let others = total - h[i];
            let upper = h[i] + gamma * others;
            let bounds_hold = h[i] <= slack(value_at_center)
                && value_at_center <= slack(ball_max)
                && ball_max <= slack(upper);
            let max_other = (0..h.len())
                .filter(|&j| j != i)
                .map(|j| h[j])
                .fold(f64::NEG_INFINITY, f64::max);
            ClaimEntry {
                index: i,
                value_at_center,
                ball_max,
                upper,
                bounds_hold,
                dominant_premise: h[i] > max_other + gamma * total,
                dominated_premise: h[i] < max_other - gamma * others,
                mode_in_ball: (mode - xi).abs() <= sigma,
            }
        })
        .collect();
    Ok(ClaimsReport {
        heights: h.to_vec(),
        mode,
        entries,
    })
}

fn ball_maximum(q: &MixtureDensity, lo: f64, hi: f64) -> f64 {
    let grid = linspace(lo, hi, 65);
    let step = grid[1] - grid[0];
    let best = grid
        .iter()
        .copied()
        .max_by(|a, b| q.pdf(*a).total_cmp(&q.pdf(*b)))
        .unwrap_or(lo);
    let a = (best - step).max(lo);
    let b = (best + step).min(hi);
    let x = golden_max(|x| q.pdf(x), a, b, 1e-12 * (hi - lo));
    q.pdf(x).max(q.pdf(best))
}

/// Confirms that mode and modal midpoint of half-width `eps` coincide on a
/// unimodal mixture of half-width-`eps` bumps centred on multiples of
/// `4·eps`.
pub fn corollary_check(p: &MixtureDensity, eps: f64) -> Result<bool> {
    if p.family() != Family::Bump {
        return Err(domain("expected a bump mixture"));
    }
    for c in p.components() {
        let hw = c.scale();
        if (hw - eps).abs() > 1e-12 * eps {
            return Err(domain(format!("component half-width {hw} differs from eps {eps}")));
        }
        let k = c.center() / (4.0 * eps);
        if (k - k.round()).abs() > 1e-9 {
            return Err(domain(format!(
                "center {} is not a multiple of 4 eps",
                c.center()
            )));
        }
    }
    let m = p.mode()?;
    if !m.unique {
        return Err(domain("density is not unimodal"));
    }
    let x = p.normalize().modal_midpoint(eps)?;
    Ok((m.location - x).abs() <= 1e-8)
}

/// `(2/3)ψ_{0,ε} + (1/3)ψ_{4ε,ε}`.
pub fn two_bump_density(eps: f64) -> Result<MixtureDensity> {
    MixtureDensity::bump(&[0.0, 4.0 * eps], eps, &[2.0 / 3.0, 1.0 / 3.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::schedule::gaussian_scenario;
    use crate::elicitation::{FnIdentification, PolynomialIdentification};

    #[test]
    fn witness_outcomes() {
        match lemma1_witness(&PolynomialIdentification::mean()).unwrap() {
            Lemma1Outcome::PremiseFails { residual_on_mixture } => {
                assert!((residual_on_mixture - 4.0 / 3.0).abs() < 1e-12)
            }
            o => panic!("{o:?}"),
        }
        match lemma1_witness(&FnIdentification::median()).unwrap() {
            Lemma1Outcome::PremiseFails { residual_on_mixture } => {
                assert!((residual_on_mixture - 1.0 / 3.0).abs() < 1e-10)
            }
            o => panic!("{o:?}"),
        }
        let shifted = FnIdentification::new(1, "y - r - 1", |r, y| vec![y - r[0] - 1.0]);
        assert!(matches!(
            lemma1_witness(&shifted).unwrap(),
            Lemma1Outcome::NotACandidate { .. }
        ));
        let synthetic = FnIdentification::new(1, "(y - r)·1{y < r + 2}", |r, y| {
            vec![if y < r[0] + 2.0 { y - r[0] } else { 0.0 }]
        })
        .with_breakpoints(|r| vec![r[0] + 2.0]);
        match lemma1_witness(&synthetic).unwrap() {
            Lemma1Outcome::Contradiction { residual_on_shifted, mode_gap, .. } => {
                assert!(residual_on_shifted.abs() <= 1e-8);
                assert!((mode_gap - 4.0).abs() <= 1e-9);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn scenario_heights_satisfy_claims() {
        let s = gaussian_scenario(6).unwrap();
        let report = claims_check(s.values(), &s).unwrap();
        assert_eq!(report.violations(), 0);
        assert!(report.entries[0].dominant_premise && report.entries[0].mode_in_ball);
        let mut spike = vec![0.0; 7];
        spike[0] = 1.0;
        let report = claims_check(&spike, &s).unwrap();
        assert_eq!(report.violations(), 0);
        assert!(report.mode.abs() < 1e-9);
    }

    #[test]
    fn corollary_examples() {
        assert!(corollary_check(&two_bump_density(1.0).unwrap(), 1.0).unwrap());
        let single = MixtureDensity::bump(&[8.0], 2.0, &[1.0]).unwrap();
        assert!(corollary_check(&single, 2.0).unwrap());
        let four = MixtureDensity::bump(&[0.0, 1.0, 2.0, 3.0], 0.25, &[0.2, 0.3, 0.4, 0.1]).unwrap();
        assert!(corollary_check(&four, 0.25).unwrap());
        let tie = MixtureDensity::bump(&[0.0, 4.0], 1.0, &[0.5, 0.5]).unwrap();
        assert!(corollary_check(&tie, 1.0).is_err());
        let off = MixtureDensity::bump(&[0.0, 3.0], 1.0, &[0.6, 0.4]).unwrap();
        assert!(corollary_check(&off, 1.0).is_err());
    }
}
