use nalgebra::DMatrix;

use crate::receiver::WindowCounts;

use super::QdscError;

/// Windows with fewer central-peak counts than this are skipped: it keeps
/// per-frequency shot noise below roughly 3%.
pub const DEFAULT_MIN_COUNTS: u64 = 1000;

/// Normalized probability matrix P (4 channels x m windows); each column
/// sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    pub p: DMatrix<f64>,
    pub m: usize,
    /// Smallest per-window total that entered the matrix (shot-noise scale).
    pub min_window_counts: u64,
    pub skipped_windows: usize,
}

/// Normalize the central-peak counts of each window into outcome
/// frequencies. Windows below `min_counts` are skipped (tallied in the
/// output); an empty result is an error.
pub fn normalize_frequencies(
    windows: &[WindowCounts],
    min_counts: u64,
) -> Result<FrequencyMatrix, QdscError> {
    let mut cols: Vec<[f64; 4]> = Vec::with_capacity(windows.len());
    let mut min_total = u64::MAX;
    let mut skipped = 0usize;
    for w in windows {
        let central = w.central();
        let total: u64 = central.iter().sum();
        if total < min_counts.max(1) {
            skipped += 1;
            continue;
        }
        min_total = min_total.min(total);
        let t = total as f64;
        cols.push([
            central[0] as f64 / t,
            central[1] as f64 / t,
            central[2] as f64 / t,
            central[3] as f64 / t,
        ]);
    }
    if cols.is_empty() {
        return Err(QdscError::EmptyInput);
    }
    let m = cols.len();
    let p = DMatrix::from_fn(4, m, |k, j| cols[j][k]);
    Ok(FrequencyMatrix { p, m, min_window_counts: min_total, skipped_windows: skipped })
}
