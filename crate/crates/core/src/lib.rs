//! Quadrilateral nonconforming finite elements of DSSY type.
//!
//! The crate provides the four-DOF nonparametric element defined on the
//! intermediate quadrilateral of a bilinear map, the parametric DSSY element
//! with optional `x̂₁x̂₂` enrichment, mesh generators, assembly and solvers
//! for Poisson, Stokes and linear elasticity, and a benchmark driver.

pub mod assembly;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod linsolve;
pub mod mesh;
pub mod quadrature;
pub mod refelem;

pub use assembly::{ElementKind, Operator};
pub use error::{Error, Result};
pub use geometry::{Point2, Quadrilateral};
pub use mesh::Mesh;
