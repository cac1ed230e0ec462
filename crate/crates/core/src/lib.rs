//! Finite-element forward and inverse solvers for the two-dimensional Stokes
//! system on an annulus, with a Neumann condition on the outer circle and a
//! Robin condition on the inner circle.
//!
//! The crate covers mesh generation, Taylor–Hood assembly, stationary and
//! evolution solvers, the discrete Stokes spectrum, Carleman weights and the
//! reconstruction of the Robin coefficient from outer-boundary data.

pub mod analytic;
pub mod carleman;
pub mod error;
pub mod evolution;
pub mod fem;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use fem::{DiscreteField, DofSpace, FieldKind, RobinField};
pub use mesh::{AnnulusSpec, BoundaryTag, Mesh};
