//! System-level simulation of vehicular wireless links.
//!
//! The pipeline mirrors a real-time channel emulation setup: a
//! geometry-based stochastic channel model produces propagation paths per
//! stationarity region ([`gscm`]), each region is condensed into a small
//! parameter vector — received power, RMS delay spread, maximum Doppler
//! shift, Rician K factor, LOS Doppler shift ([`estimator`]) — and the
//! vector keys a nearest-entry frame-error-rate lookup table ([`fer`]).
//! [`sim`] drives the whole loop and reports whether each region was
//! processed faster than its own duration.

pub mod channel;
pub mod doppler;
pub mod error;
pub mod estimator;
pub mod fer;
pub mod gscm;
pub mod rng;
pub mod sim;
pub mod tdl;

pub use error::{Error, Result};
