//! Scattering and bound states for a straight leaky wire with a compact
//! local deformation.

pub mod bie;
pub mod comparison1d;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod scattering;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
