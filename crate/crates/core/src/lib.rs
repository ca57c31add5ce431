pub mod convergence;
pub mod edge;
pub mod error;
pub mod exponents;
pub mod linalg;
pub mod profile;
pub mod quadrature;
pub mod sector;
pub mod spectral;
pub mod sphere_profile;

pub use error::{Error, ErrorKind, Result};
