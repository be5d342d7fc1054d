use nalgebra::{DMatrix, Matrix4x3, Vector3, Vector4};

use super::{FrequencyMatrix, QdscError};

/// Centered probability data after dimensional reduction: A = P - mean,
/// thin SVD keeping three components, A_tilde = U^T A.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedData {
    /// 3 x m reduced coordinates; rows ordered by singular value.
    pub a_tilde: DMatrix<f64>,
    /// Column-orthonormal 4 x 3 back-map.
    pub u: Matrix4x3<f64>,
    pub singular_values: Vector3<f64>,
    /// Column mean of P.
    pub mean_p: Vector4<f64>,
    /// Largest |entry| of the third reduced row (noise indicator).
    pub third_row_max: f64,
    /// True when the third row exceeds the shot-noise scale 5/sqrt(N_min):
    /// the data are then not consistent with a two-basis receiver.
    pub third_row_flagged: bool,
    /// Shot-noise scale 5/sqrt(N_min) of the input frequencies.
    pub noise_scale: f64,
}

/// Remove the average probability over the probe windows and reduce to
/// three dimensions by SVD. Requires at least 8 windows and rank >= 2
/// (i.e. the phase actually drifted).
pub fn center_and_reduce(freq: &FrequencyMatrix) -> Result<ReducedData, QdscError> {
    let m = freq.m;
    if m < 8 {
        return Err(QdscError::InsufficientPhaseCoverage);
    }
    let mut mean_p = Vector4::zeros();
    for j in 0..m {
        for k in 0..4 {
            mean_p[k] += freq.p[(k, j)];
        }
    }
    mean_p /= m as f64;

    let a = DMatrix::from_fn(4, m, |k, j| freq.p[(k, j)] - mean_p[k]);
    let svd = a.clone().svd(true, true);
    let u_full = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let s = &svd.singular_values;

    if s.len() < 2 || s[1] <= 1e-9 * s[0].max(1e-9) {
        return Err(QdscError::InsufficientPhaseCoverage);
    }

    let mut u = Matrix4x3::zeros();
    let mut singular_values = Vector3::zeros();
    let mut a_tilde = DMatrix::zeros(3, m);
    for i in 0..3 {
        let si = if i < s.len() { s[i] } else { 0.0 };
        singular_values[i] = si;
        for k in 0..4 {
            u[(k, i)] = u_full[(k, i)];
        }
        if i < s.len() {
            for j in 0..m {
                a_tilde[(i, j)] = si * v_t[(i, j)];
            }
        }
    }

    let third_row_max = (0..m).map(|j| a_tilde[(2, j)].abs()).fold(0.0, f64::max);
    let noise_scale = 5.0 / (freq.min_window_counts.max(1) as f64).sqrt();
    Ok(ReducedData {
        a_tilde,
        u,
        singular_values,
        mean_p,
        third_row_max,
        third_row_flagged: third_row_max > noise_scale,
        noise_scale,
    })
}
