//! Spectral solver for the mode-wise perturbation problems of Poiseuille flow
//! in a 2π-periodic pipe with Navier slip walls, together with boundary-layer
//! decompositions, a Picard solver for the nonlinear problem and a harness
//! that checks the uniform a priori estimates numerically.

pub mod decomposition;
pub mod error;
pub mod linear;
pub mod model;
pub mod nonlinear;
pub mod norms;
pub mod specfun;

pub use error::{Error, Result};
