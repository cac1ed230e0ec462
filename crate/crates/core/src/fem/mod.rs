//! Taylor–Hood spaces (continuous P2 velocity, continuous P1 pressure),
//! assembly of the bilinear forms and evaluation of discrete fields.

pub mod assembly;
pub mod element;
pub mod eval;
mod robin;
pub mod scalar;
mod space;

pub use robin::RobinField;
pub use space::{DiscreteField, DofSpace, FieldKind};
