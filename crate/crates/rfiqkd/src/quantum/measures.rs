use super::{DensityMatrix, HermitianOperator, QuantumError};

/// Born probability Tr(rho * effect), clipped to [0, 1] only when within
/// 1e-10 of the boundary.
pub fn born_probability(
    state: &DensityMatrix,
    effect: &HermitianOperator,
) -> Result<f64, QuantumError> {
    let p = state.operator().hs_inner(effect)?;
    if !(-1e-10..=1.0 + 1e-10).contains(&p) {
        return Err(QuantumError::NonPhysicalEffect(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Trace-normalized fidelity between two PSD operators:
/// Tr(sqrt(sqrt(A) B sqrt(A)))^2 / (Tr A * Tr B).
pub fn fidelity(
    ideal: &HermitianOperator,
    experimental: &HermitianOperator,
) -> Result<f64, QuantumError> {
    if ideal.dim() != experimental.dim() {
        return Err(QuantumError::DimensionMismatch(ideal.dim(), experimental.dim()));
    }
    let (ta, tb) = (ideal.trace(), experimental.trace());
    if ta.abs() < 1e-14 || tb.abs() < 1e-14 {
        return Err(QuantumError::DegenerateOperator);
    }
    let sa = ideal.sqrt_psd()?;
    let inner = HermitianOperator::new(sa.matrix() * experimental.matrix() * sa.matrix())?;
    let root = inner.sqrt_psd()?;
    let f = root.trace().powi(2) / (ta * tb);
    Ok(f.clamp(0.0, 1.0))
}

/// Binary Shannon entropy -x log2 x - (1-x) log2 (1-x), with 0 log 0 := 0.
pub fn binary_entropy(x: f64) -> Result<f64, QuantumError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(QuantumError::DomainError(x));
    }
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}
