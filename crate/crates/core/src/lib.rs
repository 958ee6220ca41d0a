//! Optimal covariant LOCC (PPT-constrained) channels between two-qubit pure
//! states.
//!
//! A channel on two qubits is handled through its 16×16 Choi matrix on the
//! ordered factors `(A_out, B_out, A_in, B_in)`, qubit 1 most significant.
//! Covariance under a local SU(2) action restricts the Choi matrix to the
//! commutant of the group, which is spanned by a handful of fixed Hermitian
//! matrices ([`irreps::CovariantAnsatz`]). Maximizing the fidelity over that
//! span with positivity, partial-transpose positivity and trace preservation
//! is a small semidefinite program solved by [`sdp::solve`].
//!
//! The [`scenarios`] module wires the four symmetry settings together,
//! evaluates the closed-form optima and checks the Kraus decompositions.

pub mod channel;
pub mod error;
pub mod irreps;
pub mod linalg;
pub mod scenarios;
pub mod sdp;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SubsystemDims, C64};
pub use scenarios::Scenario;
