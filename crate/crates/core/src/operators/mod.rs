//! Matrices, generators, and reference propagators.

pub mod audit;
pub mod expm;
pub mod generator;
pub mod matrix;
pub mod oracle;
pub mod propagator;

pub use audit::{audit_bounds, AuditReport};
pub use expm::expm;
pub use generator::{Generator, GeneratorBounds, GeneratorKind};
pub use matrix::{commutator, CMatrix, HermitianEigen};
pub use oracle::{time_ordered_exp, OrderedExp};
pub use propagator::PropagatorPath;

/// `A = A1 + i A2` with `A1 = (A + A^dagger)/2` and `A2 = (A - A^dagger)/(2i)`.
pub fn cartesian_split(a: &CMatrix) -> (CMatrix, CMatrix) {
    (a.hermitian_part(), a.anti_hermitian_part())
}
