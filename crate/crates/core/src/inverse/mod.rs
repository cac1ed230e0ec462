//! Robin coefficient reconstruction from boundary data and stability experiments.

pub mod continuation;
pub mod fit;
pub mod identifiability;
pub mod measurement;
pub mod reconstruct;
pub mod support;
pub mod sweep;

pub use continuation::Continuation;
pub use fit::{fit_free_exponent, fit_log_law, FreeExponentFit, LogLawFit};
pub use measurement::{extract_measurement, BoundaryMeasurement};
pub use reconstruct::{reconstruct_q_difference, recover_constant_q, QDifference};
pub use support::{select_k, CompactSubsetK};
pub use sweep::{stability_sweep, StabilityCurve, StabilityRecord, Twin};
