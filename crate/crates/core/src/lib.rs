//! Numerical laboratory for anisotropically damped waves on the flat torus
//! `R^2 / Z^2`: `d_t^2 u - Delta u + 2 W d_t u = 0` with a pseudodifferential
//! damping operator `W = sum_j B_j^* B_j`.

pub mod acceptance;
pub mod averages;
pub mod beams;
pub mod config;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod par;
pub mod quantization;
pub mod spectrum;
pub mod symbols;

pub use error::{AdwError, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
