use crate::quantum::Povm;
use crate::receiver::{WindowCounts, ZRecord};

use super::{
    minimize_c, qber_from_z_counts, SecurityError, SecurityInput, SecurityResult, QBER_BOUND,
};

/// Settings of a per-window security analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityConfig {
    pub epsilon: f64,
    pub finite_key: bool,
    /// Use this QBER instead of the Z-basis coincidence records.
    pub e_zz_override: Option<f64>,
    /// Pin Alice's marginal to 1/2 (see `SecurityInput::pin_marginal`).
    pub pin_marginal: bool,
    /// Windows with fewer central-peak counts are skipped.
    pub min_counts: u64,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            finite_key: false,
            e_zz_override: None,
            pin_marginal: true,
            min_counts: crate::qdsc::DEFAULT_MIN_COUNTS,
        }
    }
}

/// Mean and standard deviation of C and R over the accumulated windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecuritySummary {
    pub windows_analyzed: usize,
    pub windows_excluded: usize,
    pub c_mean: f64,
    pub c_std: f64,
    pub r_mean: f64,
    pub r_std: f64,
    pub e_zz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunAnalysis {
    /// Window ids matching `results` element-wise.
    pub window_ids: Vec<u64>,
    pub results: Vec<SecurityResult>,
    pub summary: SecuritySummary,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Analyze a run window by window: channel frequencies from the central
/// peak, the QBER from the pooled Z-basis coincidences (or the override),
/// one C-minimization per window with k = its detection count. Windows
/// whose QBER exceeds the 15.9% bound are reported but excluded from the
/// summary; low-count windows are skipped.
pub fn analyze_run(
    windows: &[WindowCounts],
    z_records: &[ZRecord],
    povm: &Povm,
    config: &SecurityConfig,
) -> Result<RunAnalysis, SecurityError> {
    if windows.is_empty() {
        return Err(SecurityError::EmptyInput);
    }
    let (e_zz, k_z) = match config.e_zz_override {
        Some(e) => (e, None),
        None => {
            let est = qber_from_z_counts(z_records)?;
            (est.e_zz, Some(est.samples))
        }
    };

    let mut results = Vec::new();
    let mut window_ids = Vec::new();
    let mut c_values = Vec::new();
    let mut r_values = Vec::new();
    let mut excluded = 0usize;
    for w in windows {
        let central = w.central();
        let total: u64 = central.iter().sum();
        if total < config.min_counts.max(1) {
            excluded += 1;
            continue;
        }
        let p_plus = [
            central[0] as f64 / total as f64,
            central[1] as f64 / total as f64,
            central[2] as f64 / total as f64,
            central[3] as f64 / total as f64,
        ];
        let input = SecurityInput {
            e_zz,
            p_plus,
            k: total,
            k_z,
            epsilon: config.epsilon,
            finite_key: config.finite_key,
            pin_marginal: config.pin_marginal,
            povm: povm.clone(),
        };
        // Shot noise can push a window's statistics slightly outside the
        // quantum set (or its consistency relations); such windows are
        // flagged and skipped, any other failure aborts the run.
        let result = match minimize_c(&input) {
            Ok(r) => r,
            Err(SecurityError::Infeasible { .. })
            | Err(SecurityError::InconsistentData { .. }) => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if e_zz <= QBER_BOUND {
            c_values.push(result.c_min);
            r_values.push(result.r);
        } else {
            excluded += 1;
        }
        window_ids.push(w.window_id);
        results.push(result);
    }
    if c_values.is_empty() {
        return Err(SecurityError::EmptyInput);
    }
    let (c_mean, c_std) = mean_std(&c_values);
    let (r_mean, r_std) = mean_std(&r_values);
    Ok(RunAnalysis {
        window_ids,
        results,
        summary: SecuritySummary {
            windows_analyzed: c_values.len(),
            windows_excluded: excluded,
            c_mean,
            c_std,
            r_mean,
            r_std,
            e_zz,
        },
    })
}
