//! Camera response function modelling and radiometric calibration.
//!
//! The crate covers the classical parametric models (gamma, polynomial,
//! generalized gamma, PCA-based EMoR), a single-latent-variable autoencoder
//! representation with its architecture search, calibration of inverse
//! responses from irradiance/intensity correspondences, and the benchmark
//! drivers that compare all of them.

pub mod autoencoder;
pub mod bench;
pub mod calibration;
pub mod curves;
pub mod error;
pub mod json;
pub mod models;
pub mod nas;
pub mod optim;

pub use error::{Error, Result};
