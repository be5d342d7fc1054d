//! Parametric simulator of the cross-encoded receiver: transmitter pulses,
//! drifting interferometer phase, splitter/waveplate/efficiency defects,
//! Poisson detection statistics and TDC-like timestamp streams.

mod drift;
mod events;
mod model;
mod window;
#[cfg(test)]
mod tests;

pub use drift::{DriftKind, DriftProcess};
pub use events::{emit_timestamps, extract_peak_counts, EventStream, ExtractedCounts, TimedEvent};
pub use model::{central_peak_state, central_peak_state_with_visibility, ground_truth_povms, raw_effects, DeviceModel};
pub use window::{simulate_run, simulate_window, simulate_window_with_z, SimRun, WindowCounts, ZRecord};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("peak window {window_ps} ps overlaps adjacent peaks (delay {delay_ns} ns)")]
    InvalidWindow { window_ps: u64, delay_ns: f64 },
    #[error("device model invalid: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Quantum(#[from] crate::quantum::QuantumError),
}

/// Time-of-arrival peaks within one pulse frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Peak {
    Early,
    Central,
    Late,
}

pub const PEAKS: [Peak; 3] = [Peak::Early, Peak::Central, Peak::Late];

impl Peak {
    pub fn index(&self) -> usize {
        match self {
            Peak::Early => 0,
            Peak::Central => 1,
            Peak::Late => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Peak::Early => "early",
            Peak::Central => "central",
            Peak::Late => "late",
        }
    }
}
