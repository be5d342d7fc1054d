use std::collections::HashMap;
use std::path::Path;

use crate::qdsc::{BoundarySet, Diagnostics, EllipseFit};
use crate::quantum::{fidelity, Povm, QuantumError, CHANNELS};
use crate::receiver::WindowCounts;
use crate::security::{RunAnalysis, SecuritySummary};

use super::IoError;

/// Key-value rendering of the reconstruction diagnostics.
pub fn diagnostics_to_document(diag: &Diagnostics) -> String {
    let mut out = String::new();
    out.push_str(&format!("windows_used={}\n", diag.windows_used));
    out.push_str(&format!("windows_skipped={}\n", diag.windows_skipped));
    out.push_str(&format!(
        "singular_values={:.6},{:.6},{:.6}\n",
        diag.singular_values[0], diag.singular_values[1], diag.singular_values[2]
    ));
    out.push_str(&format!("third_row_max={:.6}\n", diag.third_row_max));
    out.push_str(&format!("third_row_flagged={}\n", diag.third_row_flagged));
    out.push_str(&format!("hull_size={}\n", diag.hull_size));
    out.push_str(&format!("fit_residual_rms={:.6}\n", diag.fit_residual_rms));
    out.push_str(&format!("coverage_angle_deg={:.6}\n", diag.coverage_angle_deg));
    out.push_str(&format!("completeness_residual={:.6}\n", diag.completeness_residual));
    out
}

/// Plot data for the fitted response ellipse: the hull boundary points and
/// 360 sampled points of the fitted ellipse, as `series,x,y` lines.
pub fn ellipse_plot_document(boundary: &BoundarySet, fit: &EllipseFit) -> String {
    let mut out = String::from("series,x,y\n");
    for p in boundary.points() {
        out.push_str(&format!("boundary,{:.6},{:.6}\n", p[0], p[1]));
    }
    for p in fit.sample(360) {
        out.push_str(&format!("ellipse,{:.6},{:.6}\n", p[0], p[1]));
    }
    out
}

pub fn write_ellipse_plot(
    path: &Path,
    boundary: &BoundarySet,
    fit: &EllipseFit,
) -> Result<(), IoError> {
    super::write_string(path, &ellipse_plot_document(boundary, fit))
}

/// Per-window security records plus a summary block, fixed-name key/value
/// fields for machine parsing.
pub fn results_to_document(analysis: &RunAnalysis) -> String {
    let mut out = String::new();
    for (id, r) in analysis.window_ids.iter().zip(&analysis.results) {
        out.push_str(&format!(
            "window_id={id} e_zz={:.6} c_min={:.6} mu={:.6} nu={:.6} i_e={:.6} r={:.6} \
             delta={:.6} k={} solver_status={}\n",
            r.e_zz,
            r.c_min,
            r.mu,
            r.nu,
            r.i_e,
            r.r,
            r.delta,
            r.k,
            r.solver_status.label()
        ));
    }
    out.push_str(&summary_block(&analysis.summary));
    out
}

fn summary_block(s: &SecuritySummary) -> String {
    format!(
        "summary.windows_analyzed={}\nsummary.windows_excluded={}\n\
         summary.c_mean={:.6}\nsummary.c_std={:.6}\n\
         summary.r_mean={:.6}\nsummary.r_std={:.6}\nsummary.e_zz={:.6}\n",
        s.windows_analyzed, s.windows_excluded, s.c_mean, s.c_std, s.r_mean, s.r_std, s.e_zz
    )
}

pub fn write_results(path: &Path, analysis: &RunAnalysis) -> Result<(), IoError> {
    super::write_string(path, &results_to_document(analysis))
}

/// Time series of C and R (one line per analyzed window), for Fig.-style
/// rendering: `t_s,c_min,r`.
pub fn security_plot_document(windows: &[WindowCounts], analysis: &RunAnalysis) -> String {
    let starts: HashMap<u64, f64> = windows.iter().map(|w| (w.window_id, w.t_start_s)).collect();
    let mut out = String::from("t_s,c_min,r\n");
    for (id, r) in analysis.window_ids.iter().zip(&analysis.results) {
        let t = starts.get(id).copied().unwrap_or(*id as f64);
        out.push_str(&format!("{t:.6},{:.6},{:.6}\n", r.c_min, r.r));
    }
    out
}

pub fn write_security_plot(
    path: &Path,
    windows: &[WindowCounts],
    analysis: &RunAnalysis,
) -> Result<(), IoError> {
    super::write_string(path, &security_plot_document(windows, analysis))
}

/// One line of the POVM fidelity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityRow {
    pub channel: &'static str,
    /// Against the simulator's ground truth, when one exists.
    pub to_ground_truth: Option<f64>,
    /// Against the ideal MUB effects.
    pub to_ideal: f64,
}

/// Fidelity table of a recovered POVM against the ideal effects and,
/// optionally, a ground-truth POVM.
pub fn fidelity_table(
    recovered: &Povm,
    ground_truth: Option<&Povm>,
) -> Result<Vec<FidelityRow>, QuantumError> {
    let ideal = Povm::ideal();
    let mut rows = Vec::with_capacity(4);
    for ch in CHANNELS {
        let rec = recovered.element(ch);
        let to_ideal = fidelity(ideal.element(ch), rec)?;
        let to_ground_truth = match ground_truth {
            Some(gt) => Some(fidelity(gt.element(ch), rec)?),
            None => None,
        };
        rows.push(FidelityRow { channel: ch.label(), to_ground_truth, to_ideal });
    }
    Ok(rows)
}

/// End-of-pipeline report: provenance, diagnostics, fidelity table and the
/// security summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub diagnostics: Diagnostics,
    pub fidelity: Vec<FidelityRow>,
    pub summary: SecuritySummary,
}

/// FNV-1a hash of the canonical config text, as provenance fingerprint.
pub fn config_fingerprint(canonical_toml: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical_toml.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

impl ReportDocument {
    /// Every numeric field must be finite.
    pub fn validate(&self) -> Result<(), IoError> {
        let mut values = vec![
            self.diagnostics.third_row_max,
            self.diagnostics.fit_residual_rms,
            self.diagnostics.coverage_angle_deg,
            self.diagnostics.completeness_residual,
            self.summary.c_mean,
            self.summary.c_std,
            self.summary.r_mean,
            self.summary.r_std,
            self.summary.e_zz,
        ];
        values.extend_from_slice(&self.diagnostics.singular_values);
        for row in &self.fidelity {
            values.push(row.to_ideal);
            if let Some(f) = row.to_ground_truth {
                values.push(f);
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(IoError::Config(format!("report contains non-finite value {bad}")));
        }
        Ok(())
    }

    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("config_hash={}\n", self.config_hash));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("version={}\n", self.version));
        out.push('\n');
        out.push_str(&diagnostics_to_document(&self.diagnostics));
        out.push('\n');
        out.push_str("channel,fidelity_to_ground_truth,fidelity_to_ideal\n");
        for row in &self.fidelity {
            let gt = match row.to_ground_truth {
                Some(f) => format!("{f:.6}"),
                None => "n/a".into(),
            };
            out.push_str(&format!("{},{gt},{:.6}\n", row.channel, row.to_ideal));
        }
        out.push('\n');
        out.push_str(&summary_block(&self.summary));
        out
    }
}
