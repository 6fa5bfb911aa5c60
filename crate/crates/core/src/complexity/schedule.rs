//! Height schedules: the original density of a counterexample, a mixture of
//! `t + 1` well-separated components whose mode sits at the first one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mixtures::{
    unit_height_sigma, BumpComponent, Component, Family, GaussianComponent, MixtureDensity,
};

/// Placement of the components of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Geometry {
    /// Bumps of the given half-width centred at `4·i·half_width`.
    Bump { half_width: f64 },
    /// Unit-height Gaussians centred at `spacing·i`; `gamma` bounds the
    /// contribution of a neighbour inside a ball of radius `sigma`.
    Gaussian { spacing: f64, sigma: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightSchedule {
    values: Vec<f64>,
    geometry: Geometry,
}

impl HeightSchedule {
    /// Wraps arbitrary heights; no ordering invariant is checked.
    pub fn new(values: Vec<f64>, geometry: Geometry) -> Result<Self> {
        if values.len() < 2 {
            return Err(domain("a schedule needs at least two heights"));
        }
        if values.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(domain("heights must be finite and nonnegative"));
        }
        match geometry {
            Geometry::Bump { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                return Err(domain(format!("half-width must be positive, got {half_width}")))
            }
            Geometry::Gaussian { spacing, sigma, .. } if !(spacing > 2.0 * sigma) => {
                return Err(domain("gaussian spacing must exceed twice the ball radius"))
            }
            _ => {}
        }
        Ok(Self { values, geometry })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Index of the last component.
    pub fn t(&self) -> usize {
        self.values.len() - 1
    }

    pub fn family(&self) -> Family {
        match self.geometry {
            Geometry::Bump { .. } => Family::Bump,
            Geometry::Gaussian { .. } => Family::Gaussian,
        }
    }

    /// Neighbour leakage bound; zero for bumps, whose supports are disjoint.
    pub fn gamma(&self) -> f64 {
        match self.geometry {
            Geometry::Bump { .. } => 0.0,
            Geometry::Gaussian { gamma, .. } => gamma,
        }
    }

    /// Radius of the ball around each center that contains that
    /// component's peak region.
    pub fn radius(&self) -> f64 {
        match self.geometry {
            Geometry::Bump { half_width } => half_width,
            Geometry::Gaussian { sigma, .. } => sigma,
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        match self.geometry {
            Geometry::Bump { half_width } => 4.0 * i as f64 * half_width,
            Geometry::Gaussian { spacing, .. } => spacing * i as f64,
        }
    }

    pub fn component(&self, i: usize) -> Result<Component> {
        let c = self.center(i);
        Ok(match self.geometry {
            Geometry::Bump { half_width } => BumpComponent::new(c, half_width)?.into(),
            Geometry::Gaussian { .. } => GaussianComponent::unit_height(c)?.into(),
        })
    }

    /// The mixture `Σ w_i·component_i` for arbitrary weights on this
    /// geometry.
    pub fn density_with(&self, weights: &[f64]) -> Result<MixtureDensity> {
        if weights.len() != self.values.len() {
            return Err(domain(format!(
                "{} weights for {} components",
                weights.len(),
                self.values.len()
            )));
        }
        let components = (0..weights.len())
            .map(|i| self.component(i))
            .collect::<Result<Vec<_>>>()?;
        MixtureDensity::new(components, weights.to_vec())
    }

    pub fn density(&self) -> Result<MixtureDensity> {
        self.density_with(&self.values)
    }

    /// Index of the component whose ball contains `x`.
    pub fn ball_index(&self, x: f64) -> Option<usize> {
        (0..=self.t()).find(|&i| (x - self.center(i)).abs() <= self.radius())
    }

    /// The same heights on bumps of another half-width.
    pub fn with_half_width(&self, half_width: f64) -> Result<Self> {
        match self.geometry {
            Geometry::Bump { .. } => Self::new(self.values.clone(), Geometry::Bump { half_width }),
            Geometry::Gaussian { .. } => Err(domain("gaussian schedules have a fixed width")),
        }
    }

    /// Checks the ordering and normalization invariants of the family.
    pub fn check(&self) -> Result<()> {
        let h = &self.values;
        let sum: f64 = h.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("heights sum to {sum}")));
        }
        if h.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Contract("heights are not strictly decreasing".into()));
        }
        let last = h[h.len() - 1];
        match self.geometry {
            Geometry::Bump { .. } => {
                if last <= 0.5 * h[0] {
                    return Err(Error::Contract(format!(
                        "last height {last} is not above half the first {}",
                        h[0]
                    )));
                }
            }
            Geometry::Gaussian { spacing, sigma, gamma } => {
                let t = self.t() as f64;
                if h[0] - gamma <= h[1] {
                    return Err(Error::Contract("first gap does not exceed gamma".into()));
                }
                if last <= 0.75 * h[0] {
                    return Err(Error::Contract(format!(
                        "last height {last} is not above three quarters of the first {}",
                        h[0]
                    )));
                }
                if gamma >= 1.0 / (4.0 * (t + 1.0)) {
                    return Err(Error::Contract(format!("gamma {gamma} too large")));
                }
                if spacing <= sigma + ((4.0 * (t + 1.0)).ln() / PI).sqrt() {
                    return Err(Error::Contract(format!("spacing {spacing} too small")));
                }
            }
        }
        Ok(())
    }
}

/// Affinely decreasing bump heights `h_i = a - b·i` with `Σ h_i = 1` and
/// `h_t = 0.76·h_0`, on bumps of half-width 1.
pub fn bump_height_schedule(t: usize) -> Result<HeightSchedule> {
    if t == 0 {
        return Err(domain("a bump schedule needs t >= 1"));
    }
    let a = 1.0 / (0.88 * (t as f64 + 1.0));
    let b = 0.24 * a / t as f64;
    let values = (0..=t).map(|i| a - b * i as f64).collect();
    let s = HeightSchedule::new(values, Geometry::Bump { half_width: 1.0 })?;
    s.check()?;
    Ok(s)
}

/// Unit-height Gaussian heights with `h_0 = 5c/4`, `h_1 = c` (`c = 1/(t+1)`)
/// and the rest affinely decreasing about the average that makes the total
/// one, spaced far enough apart that neighbours leak at most `γ`.
pub fn gaussian_scenario(t: usize) -> Result<HeightSchedule> {
    if t < 6 {
        return Err(domain(format!(
            "the gaussian construction needs t >= 6 (t > 5), got t = {t}"
        )));
    }
    let tf = t as f64;
    let sigma = unit_height_sigma();
    let spacing = sigma + ((4.0 * (tf + 1.0)).ln() / PI).sqrt() + 0.1;
    let gamma = (-PI * (sigma - spacing).powi(2)).exp();
    let c = 1.0 / (tf + 1.0);
    let avg = c * (1.0 - 1.0 / (4.0 * (tf - 1.0)));
    let spread = 0.5 * (c - avg).min(avg - 15.0 * c / 16.0);
    let mut values = vec![1.25 * c, c];
    let m = (t - 2) as f64;
    values.extend((2..=t).map(|i| avg + spread - 2.0 * spread * (i - 2) as f64 / m));
    let s = HeightSchedule::new(values, Geometry::Gaussian { spacing, sigma, gamma })?;
    s.check()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_schedules_valid() {
        for t in 1..=12 {
            let s = bump_height_schedule(t).unwrap();
            assert_eq!(s.t(), t);
            let d = s.density().unwrap();
            assert!(d.is_normalized());
            let m = d.mode().unwrap();
            assert!(m.unique && m.location.abs() < 1e-9, "t={t} mode {m:?}");
        }
        assert!(bump_height_schedule(0).is_err());
        let s = bump_height_schedule(2).unwrap().with_half_width(0.5).unwrap();
        assert_eq!(s.center(2), 4.0);
    }

    #[test]
    fn gaussian_scenarios_valid() {
        for t in 6..=12 {
            let s = gaussian_scenario(t).unwrap();
            assert!(s.gamma() < 1.0 / (4.0 * (t as f64 + 1.0)));
            let m = s.density().unwrap().mode().unwrap();
            assert!(m.location.abs() <= s.radius(), "t={t} mode {m:?}");
        }
        assert!(gaussian_scenario(5).is_err());
    }

    #[test]
    fn gaussian_t6_heights() {
        let s = gaussian_scenario(6).unwrap();
        let h = s.values();
        assert!((h[0] - 5.0 / 28.0).abs() < 1e-15);
        assert!((h[1] - 1.0 / 7.0).abs() < 1e-15);
        let rest: f64 = h[2..].iter().sum::<f64>() / 5.0;
        assert!((rest - (1.0 - 1.0 / 20.0) / 7.0).abs() < 1e-15);
        assert!(s.gamma() < 1.0 / 28.0);
    }

    #[test]
    fn ball_lookup() {
        let s = bump_height_schedule(3).unwrap();
        assert_eq!(s.ball_index(4.3), Some(1));
        assert_eq!(s.ball_index(2.0), None);
    }
}
