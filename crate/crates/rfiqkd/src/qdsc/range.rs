use nalgebra::{DMatrix, Matrix4, Vector4};

use super::{EllipseFit, QdscError, ReducedData};

/// Four-outcome response range: overlap matrix Q4 (PSD, rank <= 2) and
/// half-trace vector t, channel order (D, A, L, R).
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRange {
    pub q4: Matrix4<f64>,
    pub t: Vector4<f64>,
}

impl ResponseRange {
    pub fn from_params(params: &crate::quantum::ResponseRangeParams) -> Self {
        Self { q4: params.q, t: params.t }
    }
}

/// Pseudo-inverse with singular values below `1e-10 * s_max` treated as
/// zero.
fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.pseudo_inverse(1e-10 * s_max.max(1e-300)).expect("eps is positive")
}

/// Map the fitted reduced ellipse back to the 4-outcome response range:
/// Q4 = -(U Q3_export U^+)^+ and t = mean + U w.
pub fn to_response_range(
    fit: &EllipseFit,
    reduced: &ReducedData,
) -> Result<ResponseRange, QdscError> {
    let active = fit.active_block();
    let eig = active.symmetric_eigen();
    let e_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-12 * e_max.max(1e-300)) {
        return Err(QdscError::InconsistentFit("degenerate ellipse (zero semi-axis)".into()));
    }

    let u = DMatrix::from_fn(4, 3, |i, j| reduced.u[(i, j)]);
    // U is column-orthonormal, so its pseudo-inverse is its transpose; the
    // double pseudo-inversion still guards the back map numerically.
    let q3_export = fit.q3_export();
    let g = &u * DMatrix::from_fn(3, 3, |i, j| q3_export[(i, j)]) * pinv(&u);
    let q4_d = -pinv(&g);
    let q4 = Matrix4::from_fn(|i, j| 0.5 * (q4_d[(i, j)] + q4_d[(j, i)]));

    let t = reduced.mean_p + reduced.u * fit.center_w;

    // Positivity of the effects requires t_k^2 >= Q_kk. The true receiver
    // often sits exactly on this boundary (rank-1 effects), so unbiased
    // shot noise violates it about half the time; violations within the
    // noise scale are repaired by shrinking Q uniformly, larger ones are
    // rejected.
    let tol = reduced.noise_scale.max(1e-6);
    let mut shrink = 1.0f64;
    for k in 0..4 {
        let slack = t[k] * t[k] - q4[(k, k)];
        if slack < -tol {
            return Err(QdscError::InconsistentFit(format!(
                "t_{k}^2 - Q_{k}{k} = {slack:.3e} < 0"
            )));
        }
        if slack < 0.0 && q4[(k, k)] > 0.0 {
            shrink = shrink.min(t[k] * t[k] / q4[(k, k)]);
        }
    }
    let q4 = if shrink < 1.0 { q4 * (shrink * (1.0 - 1e-12)) } else { q4 };
    let t_sum: f64 = t.iter().sum();
    if (t_sum - 1.0).abs() > 2e-2 {
        return Err(QdscError::InconsistentFit(format!("sum of t is {t_sum:.4}, expected 1")));
    }
    Ok(ResponseRange { q4, t })
}
