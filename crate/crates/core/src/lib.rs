//! Numerical laboratory for the elicitation of the mode.
//!
//! - [`mixtures`]: bump and Gaussian mixture densities with their mode,
//!   modal midpoint, distribution function and sampler.
//! - [`elicitation`]: losses, identification functions, link functions and
//!   Bayes acts.
//! - [`complexity`]: builds and certifies pairs of densities that share an
//!   identification root but have different modes, for any concrete
//!   finite-dimensional identification function.
//! - [`simulation`]: Monte Carlo study of the empirical modal midpoint.
//! - [`cli`]: the `modal-lab` command-line front end.

pub mod cli;
pub mod complexity;
pub mod config;
pub mod elicitation;
pub mod error;
pub mod mixtures;
pub mod optimize;
pub mod quadrature;
pub mod simulation;

pub use error::{Error, Result};
pub use mixtures::{Family, MixtureDensity, ModeResult};
