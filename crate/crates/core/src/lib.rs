//! Numerical floating-body and floating-function machinery for convex
//! bodies and log-concave densities: cap volumes and barycenters of
//! epigraphs, support envelopes, affine surface areas, and delta-sweep
//! extrapolation of the associated variational limits.

pub mod asa;
pub mod bodies;
pub mod caps;
pub mod cli;
pub mod constants;
pub mod convex;
pub mod error;
pub mod fit;
pub mod floating;
pub mod harness;
pub mod linalg;
pub mod minimize;
pub mod quad;
pub mod region;
pub mod roots;

pub use error::{Error, Result};
