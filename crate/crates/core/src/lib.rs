//! Blind wideband spectrum sensing for cooperative cognitive radio.
//!
//! The crate is organised bottom-up:
//!
//! * [`rmt`] evaluates the Marchenko–Pastur law and compares empirical
//!   eigenvalue sets against it.
//! * [`sim`] synthesises receiver sample matrices, wideband scenes and
//!   Welch PSD estimates.
//! * [`noise`] estimates the number of unused subbands and the noise
//!   variance (GLRT under a usage prior, minimum-energy shortcut, and
//!   unknown subband count via edge-based segmentation).
//! * [`detector`] computes the sample covariance, its eigenvalues and the
//!   detection statistics (MP-edge, energy, AM/GM).
//! * [`calibration`] builds empirical H0 distributions and inverts them to
//!   thresholds.
//! * [`harness`] wires everything into reproducible CSV experiments.

pub mod calibration;
pub mod detector;
pub mod error;
pub mod harness;
pub mod noise;
pub mod rmt;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
