//! Monte Carlo simulation of one- and two-qubit systems driven by random
//! control pulses under classical noise, and generation of the resulting
//! datasets.
//!
//! The pipeline for one example is
//! [`pulsegen`] → [`distortion`] → [`noisegen`] → [`hamiltonian`] →
//! [`evolution`] → [`measurement`], assembled and persisted by [`dataset`].
//! [`validation`] re-simulates records with an independent integrator.

pub mod dataset;
pub mod distortion;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod measurement;
pub mod noisegen;
pub mod pulsegen;
pub mod qlinalg;
pub mod rng;
pub mod validation;

pub use error::{Error, Result};
