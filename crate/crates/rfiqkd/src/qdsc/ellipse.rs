use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};

use super::{BoundarySet, QdscError};

/// Response-range ellipse in the reduced frame, stored in the normalized
/// quadratic form (v - w)^T Q3^+ (v - w) = 1 with Q3 positive
/// semidefinite (third row/column zero).
///
/// Exported tables usually quote the negated inverse instead (the leading
/// minus of the space-transformation map); see [`EllipseFit::q3_export`].
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseFit {
    pub q3: Matrix3<f64>,
    /// Ellipse center, embedded with z = 0.
    pub center_w: Vector3<f64>,
    /// RMS of |1 - (v - w)^T Q3^+ (v - w)| over the boundary points.
    pub residual_rms: f64,
}

impl EllipseFit {
    /// Active 2x2 block of Q3.
    pub fn active_block(&self) -> Matrix2<f64> {
        Matrix2::new(self.q3[(0, 0)], self.q3[(0, 1)], self.q3[(1, 0)], self.q3[(1, 1)])
    }

    /// The negated pseudo-inverse convention in which the reduced overlap
    /// matrix is usually printed (negative-definite active block).
    pub fn q3_export(&self) -> Matrix3<f64> {
        let inv = self.active_block().try_inverse().expect("active block is definite");
        let mut out = Matrix3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = -inv[(i, j)];
            }
        }
        out
    }

    /// Semi-axis lengths (descending): square roots of the Q3 eigenvalues.
    pub fn semi_axes(&self) -> (f64, f64) {
        let eig = self.active_block().symmetric_eigen();
        let (a, b) = (eig.eigenvalues[0].max(0.0).sqrt(), eig.eigenvalues[1].max(0.0).sqrt());
        (a.max(b), a.min(b))
    }

    /// `n` points sampled uniformly in parameter angle on the fitted
    /// ellipse, for plotting.
    pub fn sample(&self, n: usize) -> Vec<Vector2<f64>> {
        let sqrt_q = {
            let eig = self.active_block().symmetric_eigen();
            let d = Matrix2::new(
                eig.eigenvalues[0].max(0.0).sqrt(),
                0.0,
                0.0,
                eig.eigenvalues[1].max(0.0).sqrt(),
            );
            eig.eigenvectors * d * eig.eigenvectors.transpose()
        };
        (0..n)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / n as f64;
                let unit = Vector2::new(th.cos(), th.sin());
                Vector2::new(self.center_w[0], self.center_w[1]) + sqrt_q * unit
            })
            .collect()
    }
}

/// Real eigenpairs of a 3x3 nonsymmetric matrix: eigenvalues via the real
/// Schur form, eigenvectors as the smallest singular direction of M - l*I.
fn real_eigenpairs(m: &Matrix3<f64>) -> Vec<(f64, Vector3<f64>)> {
    let dm = DMatrix::from_fn(3, 3, |i, j| m[(i, j)]);
    let eigs = dm.complex_eigenvalues();
    let scale = m.norm().max(1e-300);
    let mut out = Vec::new();
    for l in eigs.iter() {
        if l.im.abs() > 1e-9 * scale {
            continue;
        }
        let shifted = m - Matrix3::identity() * l.re;
        let svd = shifted.svd(true, true);
        let v_t = svd.v_t.expect("v_t requested");
        // Right-singular vector of the smallest singular value spans the
        // (numerical) nullspace.
        let v = v_t.row(2).transpose();
        out.push((l.re, Vector3::new(v[0], v[1], v[2])));
    }
    out
}

/// Ellipse-constrained direct least squares (scatter-matrix decomposition
/// into quadratic and linear halves). Errors with `NotAnEllipse` when the
/// best conic is hyperbolic, parabolic or imaginary.
pub fn fit_ellipse(boundary: &BoundarySet) -> Result<EllipseFit, QdscError> {
    let pts = boundary.points();
    let n = pts.len();
    if n < 5 {
        return Err(QdscError::DegenerateHull { vertices: n });
    }

    // Design halves: D1 = [x^2, xy, y^2], D2 = [x, y, 1].
    let d1 = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => pts[i].x * pts[i].x,
        1 => pts[i].x * pts[i].y,
        _ => pts[i].y * pts[i].y,
    });
    let d2 = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => pts[i].x,
        1 => pts[i].y,
        _ => 1.0,
    });
    let s1 = d1.transpose() * &d1;
    let s2 = d1.transpose() * &d2;
    let s3 = d2.transpose() * &d2;
    let s3_inv = s3.try_inverse().ok_or(QdscError::NotAnEllipse)?;
    let t = -(s3_inv * s2.transpose());
    let m_red = &s1 + &s2 * &t;
    // Inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]].
    let c1_inv = Matrix3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0);
    let m_red3 = Matrix3::from_fn(|i, j| m_red[(i, j)]);
    let m_sys = c1_inv * m_red3;

    // The ellipse solution is the eigenvector with 4ac - b^2 > 0; it is
    // unique for the constrained problem.
    let mut a1: Option<Vector3<f64>> = None;
    for (_, v) in real_eigenpairs(&m_sys) {
        if 4.0 * v[0] * v[2] - v[1] * v[1] > 0.0 {
            a1 = Some(v);
            break;
        }
    }
    let a1 = a1.ok_or(QdscError::NotAnEllipse)?;
    let a1_d = DVector::from_column_slice(a1.as_slice());
    let a2 = &t * a1_d;
    let (a, b, cc) = (a1[0], a1[1], a1[2]);
    let (d, e, f) = (a2[0], a2[1], a2[2]);

    // Geometry: center from the gradient zero, scale from the constant.
    let mut quad = Matrix2::new(a, b / 2.0, b / 2.0, cc);
    let mut lin = Vector2::new(d / 2.0, e / 2.0);
    let mut f = f;
    if a < 0.0 {
        quad = -quad;
        lin = -lin;
        f = -f;
    }
    let quad_inv = quad.try_inverse().ok_or(QdscError::NotAnEllipse)?;
    let w = -(quad_inv * lin);
    let k = (w.transpose() * quad * w)[(0, 0)] - f;
    if k <= 0.0 {
        return Err(QdscError::NotAnEllipse);
    }
    // (v-w)^T (quad/k) (v-w) = 1, so Q3's active block is k * quad^{-1}.
    let q_active = quad_inv * k;
    let q_plus = quad / k;

    let mut residual_sq = 0.0;
    for p in pts {
        let v = Vector2::new(p.x - w.x, p.y - w.y);
        let r = 1.0 - (v.transpose() * q_plus * v)[(0, 0)];
        residual_sq += r * r;
    }
    let residual_rms = (residual_sq / n as f64).sqrt();

    let mut q3 = Matrix3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            q3[(i, j)] = q_active[(i, j)];
        }
    }
    Ok(EllipseFit { q3, center_w: Vector3::new(w.x, w.y, 0.0), residual_rms })
}
