pub mod catalog;
pub mod error;
pub mod extension;
pub mod fd;
pub mod polarization;
pub mod poly;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use num_complex::Complex64;
