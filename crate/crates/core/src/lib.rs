//! Photon-pair routing in a dispersion-managed nonlinear Sagnac fiber loop.
//!
//! Pairs created by spontaneous four-wave mixing in both directions of the
//! loop pick up a dispersion-induced phase difference `phi_d` in the two
//! unbalanced single-mode fiber pigtails. After recombination on the 50/50
//! coupler that phase decides whether signal and idler leave through the same
//! port or through different ports. This crate models that chain end to end:
//!
//! - [`dispersion`]: Taylor-expanded wave vectors, `phi_d`, detuning units,
//!   pump loop reflectivity.
//! - [`pairstate`]: the two-photon output state and its routing statistics.
//! - [`spectral`]: coincidence fringes vs wavelength detuning, passband
//!   averaging, fringe roots, contrast ratios and least-squares fringe fits.
//! - [`detection`]: Monte Carlo of gated Geiger-mode counting with dark
//!   counts, dead time and adjacent-pulse accidental subtraction.
//! - [`design`]: inverse design of fiber length imbalance and switching
//!   detunings, and contrast sensitivity.
//! - [`config`] and [`cli`]: TOML run configuration, CSV formats and the
//!   `spfl` command-line front end.
//!
//! Units at every interface: lengths in m, wavelengths in nm, angular
//! frequencies in rad/ps, `beta2` in ps²/m, count rates in 1/s.

pub mod cli;
pub mod config;
pub mod design;
pub mod detection;
pub mod dispersion;
mod error;
pub mod io;
pub mod numeric;
pub mod pairstate;
pub mod spectral;

pub use error::{Error, Result};

/// Speed of light in vacuum in nm/ps.
pub const SPEED_OF_LIGHT_NM_PER_PS: f64 = 299_792.458;
