//! Dense linear algebra on `SU(d)` for `d ≤ 8`: norms, exponentials and
//! logarithms, Pauli strings, Euler angles and the bi-invariant distance.

mod depth;
mod euler;
mod matrix;
mod pauli;
pub mod random;
mod spectral;

use thiserror::Error;

pub use depth::depth_lower_bound;
pub use euler::{euler_decompose, EulerAngles};
pub use matrix::{
    hs_distance, hs_norm, CMatrix, HermitianMatrix, UnitaryMatrix, C64, HERMITIAN_TOL,
    TRACE_TOL, UNITARY_TOL,
};
pub(crate) use matrix::frobenius;
pub use pauli::{
    hermitian_from_coefficients, pauli_basis, Pauli, PauliString, BASIS_QUBIT_CAP,
    DENSE_QUBIT_CAP,
};
pub use spectral::{biinvariant_distance, mat_exp, principal_log, ExpDerivative, UnitaryLog};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("matrix is not unitary (‖U†U − 1‖ = {0:e})")]
    NotUnitary(f64),
    #[error("determinant {0} is not 1")]
    NotSpecial(C64),
    #[error("matrix is not Hermitian (‖H − H†‖ = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not traceless (|Tr H| = {0:e})")]
    NotTraceless(f64),
    #[error("eigenvalue on the branch cut (phase {0})")]
    BranchCut(f64),
    #[error("integer overflow")]
    Overflow,
    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),
    #[error("{0} qubits exceeds the dense realization cap")]
    DimensionCap(usize),
    #[error("{0}")]
    InvalidArgument(String),
}
