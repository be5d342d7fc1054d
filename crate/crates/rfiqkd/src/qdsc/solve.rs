use nalgebra::{DMatrix, Vector2, Vector3};

use crate::quantum::{
    c, pauli_matrices, project_to_valid_povm, qt_from_povm, Channel, HermitianOperator, Povm,
};

use super::{QdscError, ResponseRange};

/// Reference-frame convention of the reconstructed Bloch vectors: the
/// `x_channel`'s m lies along +x and the `y_channel`'s m has a positive
/// y-component (this also fixes the reflection ambiguity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaugeSpec {
    pub x_channel: Channel,
    pub y_channel: Channel,
}

impl Default for GaugeSpec {
    fn default() -> Self {
        Self { x_channel: Channel::D, y_channel: Channel::L }
    }
}

/// Invert the response range into a POVM: rank-2 Gram factorization of Q4
/// gives the m-vectors up to a rotation/reflection, fixed by the gauge;
/// t supplies the half-traces. With `repair` the elements are projected to
/// an exactly valid POVM, otherwise a 5% completeness slack is allowed.
pub fn solve_povms(
    range: &ResponseRange,
    gauge: GaugeSpec,
    repair: bool,
) -> Result<Povm, QdscError> {
    let q = DMatrix::from_fn(4, 4, |i, j| range.q4[(i, j)]);
    let eig = q.symmetric_eigen();
    // Sort eigenpairs descending.
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let tail = vals[2].abs().max(vals[3].abs());
    if tail > 1e-3 || vals[1] < -1e-9 {
        return Err(QdscError::GramInconsistent { residual: tail.max(-vals[1]) });
    }

    let mut m2: Vec<Vector2<f64>> = Vec::with_capacity(4);
    for k in 0..4 {
        let mut v = Vector2::zeros();
        for (axis, &idx) in order[..2].iter().enumerate() {
            v[axis] = vals[axis].max(0.0).sqrt() * eig.eigenvectors[(k, idx)];
        }
        m2.push(v);
    }

    // Gram residual check before any rotation (rotations preserve it).
    let mut residual = 0.0f64;
    for k in 0..4 {
        for h in 0..4 {
            residual = residual.max((m2[k].dot(&m2[h]) - range.q4[(k, h)]).abs());
        }
    }
    if residual > 1e-3 {
        return Err(QdscError::GramInconsistent { residual });
    }

    // Rotate the x-channel onto +x, then reflect so the y-channel points
    // to +y.
    let mx = m2[gauge.x_channel.index()];
    if mx.norm() > 1e-12 {
        let theta = mx.y.atan2(mx.x);
        let (s, co) = theta.sin_cos();
        for v in &mut m2 {
            *v = Vector2::new(co * v.x + s * v.y, -s * v.x + co * v.y);
        }
    }
    if m2[gauge.y_channel.index()].y < 0.0 {
        for v in &mut m2 {
            v.y = -v.y;
        }
    }

    let [sx, sy, _] = pauli_matrices();
    let mut elements = Vec::with_capacity(4);
    for k in 0..4 {
        let m = Vector3::new(m2[k].x, m2[k].y, 0.0);
        let mat = DMatrix::identity(2, 2) * c(range.t[k], 0.0)
            + &sx * c(m[0], 0.0)
            + &sy * c(m[1], 0.0);
        elements.push(HermitianOperator::new(mat)?);
    }
    if repair {
        Ok(project_to_valid_povm(&elements)?)
    } else {
        Ok(Povm::with_tolerance(elements, 0.05)?)
    }
}

/// Rewrite a POVM in the standard gauge (x-channel m along +x, y-channel
/// m toward +y) without changing its response range. Used to compare
/// reconstructions that are only defined up to a frame rotation.
pub fn canonical_gauge(povm: &Povm) -> Result<Povm, QdscError> {
    let params = qt_from_povm(povm);
    solve_povms(&ResponseRange::from_params(&params), GaugeSpec::default(), false)
}
