//! Simulation of non-unitary linear dynamics `du/dt = -A(t) u + b(t)` by
//! separating the Hermitian (amplitude) and anti-Hermitian (phase) parts of
//! `A = A1 + i A2`.
//!
//! Every approximation is reported next to an independent reference
//! propagator so its error is measured, not assumed.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aps;
pub mod complexity;
pub mod dyson;
pub mod embeddings;
pub mod error;
pub mod fastforward;
pub mod operators;
pub mod random;
pub mod report;

pub use error::{ApsError, Result};
pub use operators::{CMatrix, Generator};
pub use report::{EvolutionReport, Evolved};
