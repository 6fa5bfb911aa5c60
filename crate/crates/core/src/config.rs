//! Text formats: densities, identification functions and experiment
//! parameters as TOML.
//!
//! A density:
//!
//! ```toml
//! family = "gaussian"
//! normalized = true
//! weights = [0.75, 0.25]
//!
//! [[components]]
//! center = 2.0
//! sigma = 1.5
//!
//! [[components]]
//! center = -2.0
//! sigma = 0.5
//! ```
//!
//! Bump components carry `half_width` instead of `sigma`; Gaussian components
//! may set `unit_height = true` and omit `sigma`.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::elicitation::PolynomialIdentification;
use crate::error::{Error, Result};
use crate::mixtures::{
    BumpComponent, Component, Family, GaussianComponent, MixtureDensity, NORMALIZATION_TOL,
};
use crate::simulation::{ExperimentConfig, DEFAULT_EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unit_height: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub family: Family,
    /// When set, the weights must sum to one.
    #[serde(default)]
    pub normalized: bool,
    pub weights: Vec<f64>,
    pub components: Vec<ComponentSpec>,
}

impl DensitySpec {
    pub fn to_density(&self) -> Result<MixtureDensity> {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| -> Result<Component> {
                match self.family {
                    Family::Bump => {
                        let w = c.half_width.ok_or_else(|| {
                            Error::Config(format!("bump component {i} needs half_width"))
                        })?;
                        if c.sigma.is_some() || c.unit_height {
                            return Err(Error::Config(format!(
                                "bump component {i} must not set sigma or unit_height"
                            )));
                        }
                        Ok(BumpComponent::new(c.center, w)?.into())
                    }
                    Family::Gaussian => {
                        if c.half_width.is_some() {
                            return Err(Error::Config(format!(
                                "gaussian component {i} must not set half_width"
                            )));
                        }
                        match (c.unit_height, c.sigma) {
                            (true, _) => Ok(GaussianComponent::unit_height(c.center)?.into()),
                            (false, Some(s)) => Ok(GaussianComponent::new(c.center, s)?.into()),
                            (false, None) => Err(Error::Config(format!(
                                "gaussian component {i} needs sigma or unit_height = true"
                            ))),
                        }
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let d = MixtureDensity::new(components, self.weights.clone())?;
        if self.normalized && (d.total_weight() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Config(format!(
                "density marked normalized but weights sum to {}",
                d.total_weight()
            )));
        }
        Ok(d)
    }

    pub fn from_density(d: &MixtureDensity) -> Self {
        let components = d
            .components()
            .iter()
            .map(|c| match c {
                Component::Bump(b) => ComponentSpec {
                    center: b.center(),
                    half_width: Some(b.half_width()),
                    sigma: None,
                    unit_height: false,
                },
                Component::Gaussian(g) => ComponentSpec {
                    center: g.center(),
                    half_width: None,
                    sigma: (!g.is_unit_height()).then_some(g.sigma()),
                    unit_height: g.is_unit_height(),
                },
            })
            .collect();
        Self {
            family: d.family(),
            normalized: d.is_normalized(),
            weights: d.weights().to_vec(),
            components,
        }
    }
}

/// Experiment parameters; every field is optional and defaults to the
/// standard study.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mixture: Option<DensitySpec>,
    pub eps: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub n: Option<usize>,
    pub master_seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let defaults = ExperimentConfig::default();
        let config = ExperimentConfig {
            mixture: match &self.mixture {
                Some(m) => m.to_density()?,
                None => defaults.mixture,
            },
            eps_list: self.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec()),
            trials: self.trials.unwrap_or(defaults.trials),
            n: self.n.unwrap_or(defaults.n),
            master_seed: self.master_seed.unwrap_or(defaults.master_seed),
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn from_toml_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn to_toml_string<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    from_toml_str(&text)
}

pub fn read_density(path: &Path) -> Result<MixtureDensity> {
    read_toml::<DensitySpec>(path)?.to_density()
}

pub fn read_identification(path: &Path) -> Result<PolynomialIdentification> {
    let v: PolynomialIdentification = read_toml(path)?;
    v.validate()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCHMARK: &str = r#"
family = "gaussian"
normalized = true
weights = [0.75, 0.25]

[[components]]
center = 2.0
sigma = 1.5

[[components]]
center = -2.0
sigma = 0.5
"#;

    #[test]
    fn parses_benchmark() {
        let d = from_toml_str::<DensitySpec>(BENCHMARK).unwrap().to_density().unwrap();
        assert!(d.is_normalized());
        assert_eq!(d.pdf(0.3), MixtureDensity::benchmark().pdf(0.3));
    }

    #[test]
    fn round_trip() {
        let d = MixtureDensity::unit_height_gaussian(&[0.0, 1.7], &[0.6, 0.4]).unwrap();
        let text = to_toml_string(&DensitySpec::from_density(&d)).unwrap();
        let back = from_toml_str::<DensitySpec>(&text).unwrap().to_density().unwrap();
        assert_eq!(back.pdf(0.0), d.pdf(0.0));
        assert_eq!(back.pdf(0.0), 0.6 + 0.4 * (-std::f64::consts::PI * 1.7f64.powi(2)).exp());
    }

    #[test]
    fn rejects_inconsistent_specs() {
        let bad = BENCHMARK.replace("sigma = 1.5", "half_width = 1.5");
        assert!(from_toml_str::<DensitySpec>(&bad).unwrap().to_density().is_err());
        let bad = BENCHMARK.replace("[0.75, 0.25]", "[0.7, 0.25]");
        assert!(from_toml_str::<DensitySpec>(&bad).unwrap().to_density().is_err());
        assert!(from_toml_str::<DensitySpec>("family = \"cauchy\"").is_err());
    }

    #[test]
    fn identification_spec() {
        let text = r#"
description = "moment pair"

[[rows]]
y_coeffs = [0.0, 1.0]
r_coeffs = [[0.0, 1.0], []]

[[rows]]
y_coeffs = [0.0, 0.0, 1.0]
r_coeffs = [[], [0.0, 1.0]]
"#;
        let v: PolynomialIdentification = from_toml_str(text).unwrap();
        assert_eq!(v, {
            let mut m = PolynomialIdentification::moments(2);
            m.description = "moment pair".into();
            m
        });
    }

    #[test]
    fn experiment_defaults_and_validation() {
        let cfg = from_toml_str::<ExperimentSpec>("trials = 5\nn = 100").unwrap().to_config().unwrap();
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.eps_list, DEFAULT_EPS.to_vec());
        let bad = from_toml_str::<ExperimentSpec>("eps = [0.1, -1.0]").unwrap();
        assert!(bad.to_config().is_err());
    }
}
