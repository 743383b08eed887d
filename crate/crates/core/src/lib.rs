//! Construction, numerical search, verification and structure analysis of
//! projective spherical (t,t)-designs in R^d.

pub mod analysis;
pub mod cli;
pub mod constructions;
pub mod design;
pub mod error;
pub mod manifold;
pub mod scan;
pub mod verify;

pub use design::{Configuration, DesignProblem, GramMatrix, NormMode, PotentialValue};
pub use error::{DesignError, Result};
