use nalgebra::{DMatrix, Matrix4, Vector3, Vector4};

use super::operator::hermiticity_residual;
use super::{c, pauli_matrices, HermitianOperator, QuantumError};

/// Receiver output channels in the globally fixed order (D, A, L, R).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    D,
    A,
    L,
    R,
}

pub const CHANNELS: [Channel; 4] = [Channel::D, Channel::A, Channel::L, Channel::R];

impl Channel {
    pub fn label(&self) -> &'static str {
        match self {
            Channel::D => "D",
            Channel::A => "A",
            Channel::L => "L",
            Channel::R => "R",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim() {
            "D" => Some(Channel::D),
            "A" => Some(Channel::A),
            "L" => Some(Channel::L),
            "R" => Some(Channel::R),
            _ => None,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Channel::D => 0,
            Channel::A => 1,
            Channel::L => 2,
            Channel::R => 3,
        }
    }

    /// Bloch vector of the channel's ideal projector direction.
    pub fn bloch_axis(&self) -> Vector3<f64> {
        match self {
            Channel::D => Vector3::new(1.0, 0.0, 0.0),
            Channel::A => Vector3::new(-1.0, 0.0, 0.0),
            Channel::L => Vector3::new(0.0, 1.0, 0.0),
            Channel::R => Vector3::new(0.0, -1.0, 0.0),
        }
    }
}

/// Weight / direction pair of a qubit effect: pi = t*I + m.sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDecomposition {
    pub t: f64,
    pub m: Vector3<f64>,
}

pub(crate) const POVM_PSD_TOL: f64 = 1e-9;
pub(crate) const POVM_COMPLETENESS_TOL: f64 = 1e-6;

/// Ordered four-element measurement {Pi_D, Pi_A, Pi_L, Pi_R}.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
}

impl Povm {
    /// Validates element positivity (1e-9) and completeness (1e-6 per entry).
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self, QuantumError> {
        Self::with_tolerance(elements, POVM_COMPLETENESS_TOL)
    }

    /// Same as `new` but with a caller-chosen completeness tolerance, for
    /// ingesting experimentally printed element sets that do not close
    /// exactly (their residual is reported by `validate_povm`).
    pub fn with_tolerance(
        elements: Vec<HermitianOperator>,
        completeness_tol: f64,
    ) -> Result<Self, QuantumError> {
        assert_eq!(elements.len(), 4, "a receiver POVM has four elements");
        let dim = elements[0].dim();
        for e in &elements {
            if e.dim() != dim {
                return Err(QuantumError::DimensionMismatch(dim, e.dim()));
            }
            let floor = e.min_eigenvalue();
            if floor < -POVM_PSD_TOL {
                return Err(QuantumError::NotPositive { floor });
            }
        }
        let residual = completeness_residual(&elements);
        if residual > completeness_tol {
            return Err(QuantumError::IncompletePovm { residual });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn element(&self, ch: Channel) -> &HermitianOperator {
        &self.elements[ch.index()]
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// The ideal receiver measurement {|D><D|/2, |A><A|/2, |L><L|/2, |R><R|/2}.
    pub fn ideal() -> Self {
        let decomps: Vec<BlochDecomposition> = CHANNELS
            .iter()
            .map(|ch| BlochDecomposition { t: 0.25, m: ch.bloch_axis() * 0.25 })
            .collect();
        povm_from_bloch(&decomps).expect("ideal POVM is valid")
    }

    pub fn bloch(&self) -> Vec<BlochDecomposition> {
        self.elements
            .iter()
            .map(|e| pauli_decompose(e).expect("POVM elements are Hermitian"))
            .collect()
    }
}

fn completeness_residual(elements: &[HermitianOperator]) -> f64 {
    let dim = elements[0].dim();
    let mut sum = DMatrix::zeros(dim, dim);
    for e in elements {
        sum += e.matrix();
    }
    (&sum - DMatrix::<super::C64>::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Decompose a 2x2 Hermitian operator as t*I + m.sigma.
pub fn pauli_decompose(op: &HermitianOperator) -> Result<BlochDecomposition, QuantumError> {
    if op.dim() != 2 {
        return Err(QuantumError::UnsupportedDimension(op.dim()));
    }
    let m = op.matrix();
    let t = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let mx = m[(0, 1)].re;
    let my = -m[(0, 1)].im;
    let mz = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    Ok(BlochDecomposition { t, m: Vector3::new(mx, my, mz) })
}

/// Assemble a POVM from four (t, m) pairs in channel order (D, A, L, R).
pub fn povm_from_bloch(decomps: &[BlochDecomposition]) -> Result<Povm, QuantumError> {
    assert_eq!(decomps.len(), 4);
    let t_sum: f64 = decomps.iter().map(|d| d.t).sum();
    let m_sum: Vector3<f64> = decomps.iter().map(|d| d.m).sum();
    if (t_sum - 1.0).abs() > POVM_COMPLETENESS_TOL || m_sum.norm() > POVM_COMPLETENESS_TOL {
        return Err(QuantumError::IncompletePovm {
            residual: (t_sum - 1.0).abs().max(m_sum.norm()),
        });
    }
    let [sx, sy, sz] = pauli_matrices();
    let mut elements = Vec::with_capacity(4);
    for d in decomps {
        if d.t < d.m.norm() - POVM_PSD_TOL {
            return Err(QuantumError::NonPositiveEffect { t: d.t, m_norm: d.m.norm() });
        }
        let mat = DMatrix::identity(2, 2) * c(d.t, 0.0)
            + &sx * c(d.m[0], 0.0)
            + &sy * c(d.m[1], 0.0)
            + &sz * c(d.m[2], 0.0);
        elements.push(HermitianOperator::new(mat)?);
    }
    Povm::new(elements)
}

/// Overlap matrix and weight vector of a POVM's response range (channel
/// order D, A, L, R):
/// Q_{kh} = Tr(Pi_k Pi_h)/2 - Tr(Pi_k)Tr(Pi_h)/4,  t_k = Tr(Pi_k)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRangeParams {
    pub q: Matrix4<f64>,
    pub t: Vector4<f64>,
}

pub fn qt_from_povm(povm: &Povm) -> ResponseRangeParams {
    let els = povm.elements();
    let mut q = Matrix4::zeros();
    let mut t = Vector4::zeros();
    for k in 0..4 {
        t[k] = 0.5 * els[k].trace();
        for h in 0..4 {
            let overlap = els[k].hs_inner(&els[h]).expect("matching dims");
            q[(k, h)] = 0.5 * overlap - 0.25 * els[k].trace() * els[h].trace();
        }
    }
    ResponseRangeParams { q, t }
}

/// Diagnostic residuals of a candidate POVM element set.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub eigenvalue_floor: f64,
    pub completeness_residual: f64,
    pub hermiticity_residual: f64,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.eigenvalue_floor >= -self.tolerance
            && self.completeness_residual <= self.tolerance
            && self.hermiticity_residual <= self.tolerance
    }
}

pub fn validate_povm(elements: &[HermitianOperator], tol: f64) -> ValidationReport {
    let eigenvalue_floor = elements
        .iter()
        .map(|e| e.min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    let hermiticity = elements
        .iter()
        .map(|e| hermiticity_residual(e.matrix()))
        .fold(0.0, f64::max);
    ValidationReport {
        eigenvalue_floor,
        completeness_residual: completeness_residual(elements),
        hermiticity_residual: hermiticity,
        tolerance: tol,
    }
}

/// Repair a noisy element set: clip negative eigenvalues to zero, then
/// sandwich by the inverse square root of the sum so the set closes exactly.
pub fn project_to_valid_povm(raw: &[HermitianOperator]) -> Result<Povm, QuantumError> {
    assert_eq!(raw.len(), 4);
    let dim = raw[0].dim();
    let mut clipped = Vec::with_capacity(4);
    for e in raw {
        let (vals, vecs) = e.eigh();
        let mut mat = DMatrix::zeros(dim, dim);
        for (i, &v) in vals.iter().enumerate() {
            if v > 0.0 {
                let col = vecs.column(i);
                mat += (&col * col.adjoint()) * c(v, 0.0);
            }
        }
        clipped.push(HermitianOperator::new(mat)?);
    }
    let mut sum = DMatrix::zeros(dim, dim);
    for e in &clipped {
        sum += e.matrix();
    }
    let sum_op = HermitianOperator::new(sum)?;
    let (vals, vecs) = sum_op.eigh();
    if vals[0] < 1e-12 {
        return Err(QuantumError::UnrepairablePovm);
    }
    let mut inv_sqrt = DMatrix::zeros(dim, dim);
    for (i, &v) in vals.iter().enumerate() {
        let col = vecs.column(i);
        inv_sqrt += (&col * col.adjoint()) * c(1.0 / v.sqrt(), 0.0);
    }
    let elements: Result<Vec<_>, _> = clipped
        .iter()
        .map(|e| HermitianOperator::new(&inv_sqrt * e.matrix() * &inv_sqrt))
        .collect();
    Povm::new(elements?)
}
