use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::receiver::{DeviceModel, DriftProcess};

use super::IoError;

/// Acquisition shape: how many windows, how long, how bright.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub n_windows: usize,
    /// Integration window length in seconds.
    pub window_s: f64,
    /// Mean total detections per window (all peaks); the central peak
    /// carries half of the flux.
    pub mean_detections: f64,
    /// Time-of-arrival acceptance window around each peak center, ps.
    pub peak_window_ps: u64,
    /// Detector timing jitter applied when emitting timestamps, ps.
    pub jitter_ps: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            n_windows: 1800,
            window_s: 2.0,
            mean_detections: 240_000.0,
            peak_window_ps: 150,
            jitter_ps: 50.0,
        }
    }
}

/// Security-analysis settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecuritySection {
    pub epsilon: f64,
    pub finite_key: bool,
    /// Use this QBER instead of the Z-basis records.
    pub e_zz_override: Option<f64>,
    pub pin_marginal: bool,
}

impl Default for SecuritySection {
    fn default() -> Self {
        Self { epsilon: 1e-5, finite_key: false, e_zz_override: None, pin_marginal: true }
    }
}

/// Output file names, resolved relative to the chosen output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub counts: String,
    pub events: String,
    pub z_records: String,
    pub ground_truth_povm: String,
    pub povm: String,
    pub diagnostics: String,
    pub ellipse_plot: String,
    pub results: String,
    pub security_plot: String,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            counts: "counts.csv".into(),
            events: "events.csv".into(),
            z_records: "z_records.csv".into(),
            ground_truth_povm: "ground_truth_povm.txt".into(),
            povm: "povm.txt".into(),
            diagnostics: "diagnostics.txt".into(),
            ellipse_plot: "ellipse_plot.csv".into(),
            results: "results.txt".into(),
            security_plot: "security_plot.csv".into(),
            report: "report.txt".into(),
        }
    }
}

/// Complete run configuration; an empty TOML file yields the defaults
/// (ideal device, 1800 x 2 s windows, epsilon = 1e-5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; overrides the drift seed so one knob controls the run.
    pub seed: Option<u64>,
    pub device: DeviceModel,
    pub drift: DriftProcess,
    pub acquisition: AcquisitionConfig,
    pub security: SecuritySection,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), IoError> {
        self.device.validate().map_err(|e| IoError::Config(format!("device: {e}")))?;
        let a = &self.acquisition;
        if a.n_windows == 0 {
            return Err(IoError::Config("acquisition.n_windows: must be at least 1".into()));
        }
        if !(a.window_s > 0.0) {
            return Err(IoError::Config(format!(
                "acquisition.window_s: {} must be positive",
                a.window_s
            )));
        }
        if !(a.mean_detections > 0.0) {
            return Err(IoError::Config(format!(
                "acquisition.mean_detections: {} must be positive",
                a.mean_detections
            )));
        }
        // Non-overlapping TOA windows: the acceptance window must not
        // reach the adjacent peak, one UMZI delay away.
        let delay_ps = self.device.umzi_delay_ns * 1000.0;
        if !((a.peak_window_ps as f64) < delay_ps) {
            return Err(IoError::Config(format!(
                "acquisition.peak_window_ps: {} ps overlaps peaks separated by {delay_ps} ps",
                a.peak_window_ps
            )));
        }
        if a.peak_window_ps == 0 {
            return Err(IoError::Config("acquisition.peak_window_ps: must be positive".into()));
        }
        if a.jitter_ps < 0.0 {
            return Err(IoError::Config(format!(
                "acquisition.jitter_ps: {} must be non-negative",
                a.jitter_ps
            )));
        }
        let s = &self.security;
        if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
            return Err(IoError::Config(format!("security.epsilon: {} not in (0,1)", s.epsilon)));
        }
        if let Some(e) = s.e_zz_override {
            if !(0.0..=0.5).contains(&e) {
                return Err(IoError::Config(format!(
                    "security.e_zz_override: {e} not in [0, 0.5]"
                )));
            }
        }
        Ok(())
    }

    /// Drift process with the master seed applied.
    pub fn effective_drift(&self) -> DriftProcess {
        let mut d = self.drift;
        if let Some(seed) = self.seed {
            d.seed = seed;
        }
        d
    }

    /// The canonical serialized form (also the hashing base for reports).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Built-in device presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Defect-free receiver.
    Ideal,
    /// The measured defects: 55:45 basis splitter, 30% less efficient L.
    PaperFig4,
}

impl Preset {
    pub fn apply(&self, config: &mut RunConfig) {
        config.device = match self {
            Preset::Ideal => DeviceModel::default(),
            Preset::PaperFig4 => DeviceModel::paper_fig4(),
        };
    }

    pub fn label(&self) -> &'static str {
        match self {
            Preset::Ideal => "ideal",
            Preset::PaperFig4 => "paper-fig4",
        }
    }
}

impl FromStr for Preset {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, IoError> {
        match s {
            "ideal" => Ok(Preset::Ideal),
            "paper-fig4" => Ok(Preset::PaperFig4),
            other => Err(IoError::Config(format!(
                "preset: unknown name {other:?} (expected \"ideal\" or \"paper-fig4\")"
            ))),
        }
    }
}

/// Parse and validate a TOML configuration string; unknown keys are
/// rejected with their key path.
pub fn parse_config_str(text: &str) -> Result<RunConfig, IoError> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| IoError::Config(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Parse and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, IoError> {
    parse_config_str(&super::read_to_string(path)?)
}
