//! Detector self-characterization: reconstruct the receiver POVM from
//! count statistics alone. Pipeline: normalize central-peak counts into a
//! probability matrix, center and reduce by SVD, keep the convex-hull
//! boundary of the 2-D cloud, fit the response ellipse directly, map back
//! to the 4-outcome response range and invert the Gram relations under a
//! gauge.

mod ellipse;
mod frequency;
mod hull;
mod range;
mod reduce;
mod solve;
#[cfg(test)]
mod tests;

pub use ellipse::{fit_ellipse, EllipseFit};
pub use frequency::{normalize_frequencies, FrequencyMatrix, DEFAULT_MIN_COUNTS};
pub use hull::{convex_hull_boundary, BoundarySet};
pub use range::{to_response_range, ResponseRange};
pub use reduce::{center_and_reduce, ReducedData};
pub use solve::{canonical_gauge, solve_povms, GaugeSpec};

use crate::quantum::Povm;
use crate::receiver::WindowCounts;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QdscError {
    #[error("no window met the minimum-count threshold")]
    EmptyInput,
    #[error("centered data has rank < 2; the phase never drifted")]
    InsufficientPhaseCoverage,
    #[error("convex hull has only {vertices} vertices; at least 5 needed for a conic fit")]
    DegenerateHull { vertices: usize },
    #[error("best-fitting conic is not a real ellipse")]
    NotAnEllipse,
    #[error("fit is inconsistent with a physical response range: {0}")]
    InconsistentFit(String),
    #[error("overlap matrix is not rank-2 consistent (residual {residual:.3e})")]
    GramInconsistent { residual: f64 },
    #[error("boundary spans only {span_deg:.1} degrees around the center; need at least 270")]
    CoverageTooLow { span_deg: f64 },
    #[error(transparent)]
    Quantum(#[from] crate::quantum::QuantumError),
}

/// Per-run reconstruction diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub windows_used: usize,
    pub windows_skipped: usize,
    pub singular_values: [f64; 3],
    pub third_row_max: f64,
    pub third_row_flagged: bool,
    pub hull_size: usize,
    pub fit_residual_rms: f64,
    pub coverage_angle_deg: f64,
    pub completeness_residual: f64,
}

/// Knobs of the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdscOptions {
    pub min_counts: u64,
    pub gauge: GaugeSpec,
    /// Project the solved elements to an exactly valid POVM (recommended
    /// for statistical data).
    pub repair: bool,
}

impl Default for QdscOptions {
    fn default() -> Self {
        Self { min_counts: DEFAULT_MIN_COUNTS, gauge: GaugeSpec::default(), repair: true }
    }
}

/// Run the full reconstruction with default options.
pub fn run_qdsc(windows: &[WindowCounts]) -> Result<(Povm, Diagnostics), QdscError> {
    run_qdsc_with(windows, &QdscOptions::default())
}

/// Run the full reconstruction: normalize, reduce, hull, fit, back-map,
/// solve. Refuses when the boundary covers less than 270 degrees of arc
/// around the fitted center.
pub fn run_qdsc_with(
    windows: &[WindowCounts],
    options: &QdscOptions,
) -> Result<(Povm, Diagnostics), QdscError> {
    let detailed = run_qdsc_detailed(windows, options)?;
    Ok((detailed.povm, detailed.diagnostics))
}

/// Full pipeline output including the geometric intermediates (for plot
/// files and inspection).
#[derive(Debug, Clone)]
pub struct QdscOutput {
    pub povm: Povm,
    pub diagnostics: Diagnostics,
    pub boundary: BoundarySet,
    pub fit: EllipseFit,
}

/// As [`run_qdsc_with`], also returning the hull boundary and ellipse fit.
pub fn run_qdsc_detailed(
    windows: &[WindowCounts],
    options: &QdscOptions,
) -> Result<QdscOutput, QdscError> {
    let freq = normalize_frequencies(windows, options.min_counts)?;
    let reduced = center_and_reduce(&freq)?;
    let boundary = convex_hull_boundary(&reduced)?;
    let fit = fit_ellipse(&boundary)?;

    let span_deg = boundary.angular_span_deg(fit.center_w[0], fit.center_w[1]);
    if span_deg < 270.0 {
        return Err(QdscError::CoverageTooLow { span_deg });
    }

    let range = to_response_range(&fit, &reduced)?;
    let povm = solve_povms(&range, options.gauge, options.repair)?;
    let report = crate::quantum::validate_povm(povm.elements(), 1e-6);

    let diag = Diagnostics {
        windows_used: freq.m,
        windows_skipped: freq.skipped_windows,
        singular_values: [
            reduced.singular_values[0],
            reduced.singular_values[1],
            reduced.singular_values[2],
        ],
        third_row_max: reduced.third_row_max,
        third_row_flagged: reduced.third_row_flagged,
        hull_size: boundary.points().len(),
        fit_residual_rms: fit.residual_rms,
        coverage_angle_deg: span_deg,
        completeness_residual: report.completeness_residual,
    };
    Ok(QdscOutput { povm, diagnostics: diag, boundary, fit })
}
