use nalgebra::DMatrix;

use super::{c, C64, QuantumError};

pub(crate) const HERMITICITY_TOL: f64 = 1e-12;
pub(crate) const PSD_TOL: f64 = 1e-10;
pub(crate) const TRACE_TOL: f64 = 1e-10;

/// A dimensionless Hermitian operator of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: DMatrix<C64>,
}

impl HermitianOperator {
    /// Validates squareness, supported dimension and Hermiticity (1e-12).
    pub fn new(mat: DMatrix<C64>) -> Result<Self, QuantumError> {
        let n = mat.nrows();
        if !mat.is_square() || (n != 2 && n != 4) {
            return Err(QuantumError::UnsupportedDimension(n));
        }
        let residual = hermiticity_residual(&mat);
        if residual > HERMITICITY_TOL {
            return Err(QuantumError::InvalidOperator { residual });
        }
        // Symmetrize so downstream eigensolves see an exactly Hermitian matrix.
        let herm = (&mat + mat.adjoint()) * c(0.5, 0.0);
        Ok(Self { mat: herm })
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: DMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Real part of Tr(self * other).
    pub fn hs_inner(&self, other: &Self) -> Result<f64, QuantumError> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok((&self.mat * &other.mat).trace().re)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { mat: &self.mat * c(factor, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Result<Self, QuantumError> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Self { mat: &self.mat + &other.mat })
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = DMatrix::zeros(self.dim(), self.dim());
        for (j, &i) in order.iter().enumerate() {
            vecs.set_column(j, &eig.eigenvectors.column(i));
        }
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0[0]
    }

    /// Principal square root via eigendecomposition.
    ///
    /// Eigenvalues in [-1e-10, 0) are clipped to zero so near-singular
    /// effects do not produce NaN; values below -1e-9 are rejected.
    pub fn sqrt_psd(&self) -> Result<Self, QuantumError> {
        let (vals, vecs) = self.eigh();
        if vals[0] < -1e-9 {
            return Err(QuantumError::NotPositive { floor: vals[0] });
        }
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (i, &v) in vals.iter().enumerate() {
            let s = v.max(0.0).sqrt();
            let col = vecs.column(i);
            out += (&col * col.adjoint()) * c(s, 0.0);
        }
        Ok(Self { mat: out })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn hermiticity_residual(mat: &DMatrix<C64>) -> f64 {
    (mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self, QuantumError> {
        let floor = op.min_eigenvalue();
        if floor < -PSD_TOL {
            return Err(QuantumError::NotPositive { floor });
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(QuantumError::NotUnitTrace(tr));
        }
        Ok(Self { op })
    }

    /// Pure state |psi><psi| from an (unnormalized) state vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self, QuantumError> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(QuantumError::DegenerateOperator);
        }
        let n = amplitudes.len();
        let v = DMatrix::from_column_slice(n, 1, amplitudes);
        let proj = (&v * v.adjoint()) * c(1.0 / norm2, 0.0);
        Self::new(HermitianOperator::new(proj)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let op = HermitianOperator::identity(dim).scale(1.0 / dim as f64);
        Self { op }
    }

    /// Qubit state from a Bloch vector with |r| <= 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self, QuantumError> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(QuantumError::NotPositive { floor: (1.0 - norm) / 2.0 });
        }
        let [sx, sy, sz] = super::pauli_matrices();
        let mat = (DMatrix::identity(2, 2)
            + sx * c(r[0], 0.0)
            + sy * c(r[1], 0.0)
            + sz * c(r[2], 0.0))
            * c(0.5, 0.0);
        Ok(Self { op: HermitianOperator::new(mat)? })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}
