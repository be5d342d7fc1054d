//! RFI-QKD security quantities: Z-basis QBER, the correlation parameter C
//! minimized by a convex semidefinite program over bipartite states
//! consistent with the observed statistics, Eve's information bound and
//! the secret-key fraction, with finite-key statistical relaxations.

mod bounds;
mod oracle;
mod run;
mod sdp;

pub use bounds::{
    c_parameter, delta_finite_key, eve_information, key_rate, mu_nu, qber_from_z_counts,
    EveBound, KeyFraction, QberEstimate, QBER_BOUND,
};
pub use oracle::brute_force_c_min;
pub use run::{analyze_run, RunAnalysis, SecurityConfig, SecuritySummary};
pub use sdp::{minimize_c, SecurityInput, SecurityResult, SolverStatus};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SecurityError {
    #[error("domain violation: {0}")]
    DomainError(String),
    #[error("no Z-basis coincidences to estimate the QBER from")]
    EmptyInput,
    #[error("(C, e) pair is infeasible: radicand {radicand:.3e}")]
    InfeasiblePair { radicand: f64 },
    #[error("constraint set is empty (best interior eigenvalue {lambda_min:.3e})")]
    Infeasible { lambda_min: f64 },
    #[error("statistics are inconsistent with the measurement beyond sampling noise \
             (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    InconsistentData { residual: f64, tolerance: f64 },
    #[error(transparent)]
    Quantum(#[from] crate::quantum::QuantumError),
}
