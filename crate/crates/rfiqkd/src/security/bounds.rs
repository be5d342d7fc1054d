use crate::quantum::{binary_entropy, kron, pauli_matrices, DensityMatrix};
use crate::receiver::ZRecord;

use super::SecurityError;

/// Largest Z-basis QBER for which the Eve-information bound is derived.
pub const QBER_BOUND: f64 = 0.159;

/// Finite-key statistical deviation for k samples at security level
/// epsilon: sqrt[(ln(1/eps) + 2 ln(k+1)) / (2k)].
pub fn delta_finite_key(k: u64, epsilon: f64) -> Result<f64, SecurityError> {
    if k < 1 {
        return Err(SecurityError::DomainError("k must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SecurityError::DomainError(format!("epsilon {epsilon} not in (0,1)")));
    }
    let kf = k as f64;
    Ok((((1.0 / epsilon).ln() + 2.0 * (kf + 1.0).ln()) / (2.0 * kf)).sqrt())
}

/// Z-basis QBER estimate from coincidence tallies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberEstimate {
    pub e_zz: f64,
    /// Number of coincidences behind the estimate.
    pub samples: u64,
    /// e > 0.5 usually means the key bits are mapped with inverted sign.
    pub basis_flip_suspected: bool,
}

/// Pool Z-basis records into e = errors / total (the anticorrelation-as-
/// error convention: e = (1 - <Z_A Z_B>)/2).
pub fn qber_from_z_counts(records: &[ZRecord]) -> Result<QberEstimate, SecurityError> {
    let correct: u64 = records.iter().map(|r| r.correct).sum();
    let errors: u64 = records.iter().map(|r| r.errors).sum();
    let total = correct + errors;
    if total == 0 {
        return Err(SecurityError::EmptyInput);
    }
    let e_zz = errors as f64 / total as f64;
    Ok(QberEstimate { e_zz, samples: total, basis_flip_suspected: e_zz > 0.5 })
}

/// The (mu, nu) pair entering the Eve-information bound:
/// mu = min[sqrt(C/2)/(1-e), 1], nu = sqrt(C/2 - (1-e)^2 mu^2)/e.
/// The radicand vanishes identically when mu is unclipped; tiny negative
/// values (roundoff) are clamped, larger ones are a genuine infeasibility.
pub fn mu_nu(c: f64, e: f64) -> Result<(f64, f64), SecurityError> {
    if !(0.0..=2.0).contains(&c) {
        return Err(SecurityError::DomainError(format!("C {c} not in [0,2]")));
    }
    if !(0.0..1.0).contains(&e) {
        return Err(SecurityError::DomainError(format!("e {e} not in [0,1)")));
    }
    let mu = ((c / 2.0).sqrt() / (1.0 - e)).min(1.0);
    let radicand = c / 2.0 - ((1.0 - e) * mu).powi(2);
    if radicand < -1e-12 {
        return Err(SecurityError::InfeasiblePair { radicand });
    }
    // nu caps at 1 (entropy argument bound); beyond it the (C, e) pair
    // lies outside the region where the leakage bound is derived, and
    // h((1+nu)/2) = 0 is the conservative continuation.
    let nu = if e == 0.0 { 0.0 } else { (radicand.max(0.0).sqrt() / e).min(1.0) };
    Ok((mu, nu))
}

/// Eve's information bound I_E = (1-e) h((1+mu)/2) + e h((1+nu)/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveBound {
    pub i_e: f64,
    /// The bound is derived only for e <= 15.9%; beyond that the value is
    /// still computed but must not enter key accumulation.
    pub above_qber_bound: bool,
}

pub fn eve_information(c: f64, e: f64) -> Result<EveBound, SecurityError> {
    let (mu, nu) = mu_nu(c, e)?;
    let h = |x: f64| binary_entropy(x).expect("argument in [0,1] by construction");
    let i_e = (1.0 - e) * h((1.0 + mu) / 2.0) + e * h((1.0 + nu) / 2.0);
    Ok(EveBound { i_e, above_qber_bound: e > QBER_BOUND })
}

/// Secret-key fraction R = 1 - h(e) - I_E; may be negative (no key).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyFraction {
    pub r: f64,
    pub i_e: f64,
    pub mu: f64,
    pub nu: f64,
    pub above_qber_bound: bool,
}

pub fn key_rate(c: f64, e: f64) -> Result<KeyFraction, SecurityError> {
    let (mu, nu) = mu_nu(c, e)?;
    let bound = eve_information(c, e)?;
    let r = 1.0 - binary_entropy(e).map_err(|_| {
        SecurityError::DomainError(format!("e {e} outside [0,1]"))
    })? - bound.i_e;
    Ok(KeyFraction { r, i_e: bound.i_e, mu, nu, above_qber_bound: bound.above_qber_bound })
}

/// Correlation parameter C = <XX>^2 + <XY>^2 + <YX>^2 + <YY>^2 of a
/// two-qubit state, with ideal Pauli observables on both sides.
pub fn c_parameter(rho: &DensityMatrix) -> Result<f64, SecurityError> {
    if rho.dim() != 4 {
        return Err(SecurityError::DomainError(format!(
            "c_parameter needs a two-qubit state, got dim {}",
            rho.dim()
        )));
    }
    let [sx, sy, _] = pauli_matrices();
    let mut c = 0.0;
    for a in [&sx, &sy] {
        for b in [&sx, &sy] {
            let obs = kron(a, b);
            let val = (rho.operator().matrix() * obs).trace().re;
            c += val * val;
        }
    }
    Ok(c)
}
