use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::{DeviceModel, SimError, WindowCounts};

/// One detection: channel index (0..3 for D, A, L, R) and TDC timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedEvent {
    pub channel: u8,
    pub timestamp_ps: u64,
}

/// Time-ordered detection events of one window.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventStream {
    events: Vec<TimedEvent>,
}

impl EventStream {
    pub fn new(mut events: Vec<TimedEvent>) -> Self {
        events.sort_by_key(|e| e.timestamp_ps);
        Self { events }
    }

    pub fn events(&self) -> &[TimedEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Expand window counts into a TDC-like event stream: each count becomes an
/// event at its peak center plus Gaussian jitter, frames spaced by the pulse
/// period and peaks by the UMZI delay.
pub fn emit_timestamps(
    counts: &WindowCounts,
    model: &DeviceModel,
    jitter_ps: f64,
    rng_seed: u64,
) -> Result<EventStream, SimError> {
    if jitter_ps < 0.0 {
        return Err(SimError::InvalidModel("jitter must be non-negative".into()));
    }
    model.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let period_ps = model.pulse_period_ns * 1000.0;
    let delay_ps = model.umzi_delay_ns * 1000.0;
    let n_frames = ((counts.duration_s * 1e12 / period_ps) as u64).max(1);
    let frame_dist = Uniform::new(0, n_frames);
    let jitter = Normal::new(0.0, jitter_ps.max(f64::MIN_POSITIVE)).unwrap();

    let mut events = Vec::with_capacity(counts.total() as usize);
    for (k, per_peak) in counts.counts.iter().enumerate() {
        for (peak, &n) in per_peak.iter().enumerate() {
            for _ in 0..n {
                let frame = frame_dist.sample(&mut rng);
                let center = frame as f64 * period_ps + peak as f64 * delay_ps;
                let t = if jitter_ps > 0.0 { center + jitter.sample(&mut rng) } else { center };
                events.push(TimedEvent { channel: k as u8, timestamp_ps: t.max(0.0).round() as u64 });
            }
        }
    }
    Ok(EventStream::new(events))
}

/// Peak-classified counts plus the number of out-of-window events dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedCounts {
    pub counts: WindowCounts,
    pub discarded: u64,
}

/// Classify events into early/central/late peaks by nearest peak center
/// within +-window/2; everything else is discarded (and counted).
pub fn extract_peak_counts(
    events: &EventStream,
    window_ps: u64,
    delay_ns: f64,
    period_ns: f64,
    duration_s: f64,
) -> Result<ExtractedCounts, SimError> {
    let delay_ps = delay_ns * 1000.0;
    let period_ps = period_ns * 1000.0;
    if window_ps == 0 || window_ps as f64 > delay_ps {
        return Err(SimError::InvalidWindow { window_ps, delay_ns });
    }
    let half = window_ps as f64 / 2.0;
    let mut counts = [[0u64; 3]; 4];
    let mut discarded = 0u64;
    for e in events.events() {
        let phase = (e.timestamp_ps as f64).rem_euclid(period_ps);
        let mut assigned = false;
        for peak in 0..3usize {
            let center = peak as f64 * delay_ps;
            // Distance on the frame circle, so jitter across a frame edge
            // still lands in the early peak of the next frame.
            let mut d = (phase - center).abs();
            d = d.min(period_ps - d);
            if d <= half {
                counts[e.channel as usize][peak] += 1;
                assigned = true;
                break;
            }
        }
        if !assigned {
            discarded += 1;
        }
    }
    Ok(ExtractedCounts {
        counts: WindowCounts { window_id: 0, t_start_s: 0.0, duration_s, counts },
        discarded,
    })
}
