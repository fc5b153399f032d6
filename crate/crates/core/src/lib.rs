//! Curvature and curvature-symmetry analysis of Riemannian metrics given in
//! a single coordinate chart.

pub mod cli;
pub mod curvature;
pub mod error;
pub mod metricspace;
pub mod scalar;
pub mod shapeops;
pub mod symmetry;
pub mod tensorlab;
pub mod transport;

pub use error::{Error, ParseError, Result};
