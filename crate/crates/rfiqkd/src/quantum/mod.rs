//! Linear-algebra substrate: Hermitian operators, Bloch/Pauli decomposition,
//! POVM validity, Born probabilities, fidelity and binary entropy.

mod measures;
mod operator;
mod povm;

pub use measures::{binary_entropy, born_probability, fidelity};
pub use operator::{DensityMatrix, HermitianOperator};
pub use povm::{
    pauli_decompose, povm_from_bloch, project_to_valid_povm, qt_from_povm, validate_povm,
    BlochDecomposition, Channel, Povm, ResponseRangeParams, ValidationReport, CHANNELS,
};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuantumError {
    #[error("operator is not Hermitian (residual {residual:e})")]
    InvalidOperator { residual: f64 },
    #[error("unsupported operator dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operator is not positive semidefinite (eigenvalue floor {floor:e})")]
    NotPositive { floor: f64 },
    #[error("trace must be one, got {0}")]
    NotUnitTrace(f64),
    #[error("POVM completeness violated (residual {residual:e})")]
    IncompletePovm { residual: f64 },
    #[error("effect weight below Bloch norm (t = {t}, |m| = {m_norm})")]
    NonPositiveEffect { t: f64, m_norm: f64 },
    #[error("Born probability {0} outside [0, 1]")]
    NonPhysicalEffect(f64),
    #[error("fidelity of a zero-trace operator is undefined")]
    DegenerateOperator,
    #[error("POVM sum is singular; cannot renormalize")]
    UnrepairablePovm,
    #[error("argument {0} outside domain")]
    DomainError(f64),
}

pub type C64 = Complex64;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrices as 2x2 complex matrices, order (x, y, z).
pub fn pauli_matrices() -> [nalgebra::DMatrix<C64>; 3] {
    use nalgebra::DMatrix;
    let sx = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    let sy = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    let sz = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    [sx, sy, sz]
}

/// Kronecker product of two complex matrices.
pub fn kron(
    a: &nalgebra::DMatrix<C64>,
    b: &nalgebra::DMatrix<C64>,
) -> nalgebra::DMatrix<C64> {
    a.kronecker(b)
}
