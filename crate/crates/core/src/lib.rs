//! Multi-parameter Fourier integral operators with separable phases: the
//! frequency partition, phase and symbol classes, kernel evaluation, regions
//! of influence, and experiments measuring the decay estimates.

pub mod config;
pub mod engine;
pub mod error;
pub mod estimate;
pub mod fd;
pub mod geometry;
pub mod partition;
pub mod phase;
pub mod quad;
pub mod runner;
pub mod symbol;

pub use error::{Error, Result};
