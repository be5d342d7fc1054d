use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::quantum::{born_probability, c, DensityMatrix, Povm};

use super::{central_peak_state_with_visibility, ground_truth_povms, DeviceModel, DriftProcess, SimError};

/// Per-integration-window counts: 4 channels (D, A, L, R) x 3 peaks
/// (early, central, late).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCounts {
    pub window_id: u64,
    pub t_start_s: f64,
    pub duration_s: f64,
    pub counts: [[u64; 3]; 4],
}

impl WindowCounts {
    pub fn central(&self) -> [u64; 4] {
        [self.counts[0][1], self.counts[1][1], self.counts[2][1], self.counts[3][1]]
    }

    pub fn central_total(&self) -> u64 {
        self.central().iter().sum()
    }

    pub fn lateral_total(&self) -> u64 {
        self.counts.iter().map(|ch| ch[0] + ch[2]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Ground-truth Z-basis coincidence tally of one window (simulator-side
/// bookkeeping; the real apparatus would obtain this from sifting).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZRecord {
    pub window_id: u64,
    pub correct: u64,
    pub errors: u64,
}

fn poisson(rng: &mut ChaCha12Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

fn binomial(rng: &mut ChaCha12Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Simulate one integration window at a fixed interferometer phase.
///
/// Central-peak channel means follow the Born rule against the ground-truth
/// POVM; the lateral peaks carry the remaining 50% of the flux with the
/// deterministic H/E, V/L polarization of the outer interferometer paths.
pub fn simulate_window(
    phi: f64,
    model: &DeviceModel,
    mean_detections: f64,
    duration_s: f64,
    rng_seed: u64,
) -> Result<WindowCounts, SimError> {
    Ok(simulate_window_with_z(phi, model, mean_detections, duration_s, rng_seed)?.0)
}

/// Same as [`simulate_window`] but also reports the Z-basis coincidence
/// tally used to estimate the key-basis error rate.
pub fn simulate_window_with_z(
    phi: f64,
    model: &DeviceModel,
    mean_detections: f64,
    duration_s: f64,
    rng_seed: u64,
) -> Result<(WindowCounts, ZRecord), SimError> {
    let povm = ground_truth_povms(model)?;
    simulate_window_inner(phi, model, &povm, mean_detections, duration_s, rng_seed, 0)
}

pub(crate) fn simulate_window_inner(
    phi: f64,
    model: &DeviceModel,
    povm: &Povm,
    mean_detections: f64,
    duration_s: f64,
    rng_seed: u64,
    window_id: u64,
) -> Result<(WindowCounts, ZRecord), SimError> {
    if duration_s <= 0.0 {
        return Err(SimError::InvalidModel("duration must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let central_state = central_peak_state_with_visibility(phi, model.visibility);
    let h_state = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).expect("valid");
    let v_state = DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0)]).expect("valid");

    let mut counts = [[0u64; 3]; 4];
    let mut z_correct = 0u64;
    let mut z_errors = 0u64;
    for (k, effect) in povm.elements().iter().enumerate() {
        let p_central = born_probability(&central_state, effect)?;
        let p_early = born_probability(&h_state, effect)?;
        let p_late = born_probability(&v_state, effect)?;

        let mut early = poisson(&mut rng, 0.25 * mean_detections * p_early);
        let mut late = poisson(&mut rng, 0.25 * mean_detections * p_late);
        let central = poisson(&mut rng, 0.5 * mean_detections * p_central);

        // Intrinsic key-bit flips move lateral events to the wrong peak.
        let flip_e = binomial(&mut rng, early, model.z_flip_probability);
        let flip_l = binomial(&mut rng, late, model.z_flip_probability);
        early = early - flip_e + flip_l;
        late = late - flip_l + flip_e;
        z_errors += flip_e + flip_l;
        z_correct += early + late - flip_e - flip_l;

        // Dark counts are time-uniform across the three equal-width peaks.
        let dark_per_peak = model.dark_rate_hz[k] * duration_s / 3.0;
        let dark = [
            poisson(&mut rng, dark_per_peak),
            poisson(&mut rng, dark_per_peak),
            poisson(&mut rng, dark_per_peak),
        ];
        // Lateral dark counts land on a random key bit.
        let dark_lateral = dark[0] + dark[2];
        let dark_err = binomial(&mut rng, dark_lateral, 0.5);
        z_errors += dark_err;
        z_correct += dark_lateral - dark_err;

        counts[k] = [early + dark[0], central + dark[1], late + dark[2]];
    }
    let wc = WindowCounts {
        window_id,
        t_start_s: window_id as f64 * duration_s,
        duration_s,
        counts,
    };
    Ok((wc, ZRecord { window_id, correct: z_correct, errors: z_errors }))
}

/// A complete simulated acquisition.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub windows: Vec<WindowCounts>,
    pub z_records: Vec<ZRecord>,
    pub ground_truth: Povm,
    pub phases: Vec<f64>,
}

/// Simulate `n_windows` consecutive windows with phases from the drift
/// process. Deterministic given the drift seed.
pub fn simulate_run(
    model: &DeviceModel,
    drift: &DriftProcess,
    n_windows: usize,
    mean_per_window: f64,
    duration_s: f64,
) -> Result<SimRun, SimError> {
    if n_windows == 0 {
        return Err(SimError::InvalidModel("n_windows must be at least 1".into()));
    }
    let povm = ground_truth_povms(model)?;
    let phases = drift.phases(n_windows);
    let mut windows = Vec::with_capacity(n_windows);
    let mut z_records = Vec::with_capacity(n_windows);
    for (j, &phi) in phases.iter().enumerate() {
        // Per-window sub-seed: mix the run seed with the window index.
        let sub_seed = drift.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(j as u64);
        let (wc, z) = simulate_window_inner(
            phi,
            model,
            &povm,
            mean_per_window,
            duration_s,
            sub_seed,
            j as u64,
        )?;
        windows.push(wc);
        z_records.push(z);
    }
    Ok(SimRun { windows, z_records, ground_truth: povm, phases })
}
