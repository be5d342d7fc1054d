use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quantum::{
    c, pauli_matrices, project_to_valid_povm, DensityMatrix, HermitianOperator, Povm, C64,
};

use super::SimError;

/// Physical model of the transmitter repetition, UMZI delay and the
/// defective passive receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceModel {
    /// Probability of the X-basis arm of the basis-choice splitter (ideal 0.5).
    pub bs_ratio: f64,
    /// Coupling + detection efficiency per channel (D, A, L, R).
    pub detector_efficiency: [f64; 4],
    /// Dark count rate per channel in Hz.
    pub dark_rate_hz: [f64; 4],
    /// Half-wave plate misalignment in the X arm, degrees.
    pub hwp_error_deg: f64,
    /// Quarter-wave plate misalignment in the Y arm, degrees.
    pub qwp_error_deg: f64,
    /// UMZI arm delay, nanoseconds.
    pub umzi_delay_ns: f64,
    /// Pulse frame period, nanoseconds (76 MHz repetition).
    pub pulse_period_ns: f64,
    /// Interference visibility of the central peak (scales the state's
    /// off-diagonal), default 1.
    pub visibility: f64,
    /// Intrinsic key-bit flip probability of the lateral-peak model.
    pub z_flip_probability: f64,
    /// Per-channel polarization depolarization (D, A, L, R): fraction of
    /// each effect replaced by an isotropic background of the same weight,
    /// modeling imperfect polarization optics in front of the detector.
    pub depolarization: [f64; 4],
}

impl Default for DeviceModel {
    fn default() -> Self {
        Self {
            bs_ratio: 0.5,
            detector_efficiency: [1.0; 4],
            dark_rate_hz: [0.0; 4],
            hwp_error_deg: 0.0,
            qwp_error_deg: 0.0,
            umzi_delay_ns: 2.5,
            pulse_period_ns: 1000.0 / 76.0,
            visibility: 1.0,
            z_flip_probability: 0.0,
            depolarization: [0.0; 4],
        }
    }
}

impl DeviceModel {
    /// The defect preset observed on the physical receiver: 55:45 basis
    /// splitter, a 30% less efficient L channel, per-channel polarization
    /// defects matching the measured fidelity-to-ideal band, and a small
    /// intrinsic key-basis error.
    pub fn paper_fig4() -> Self {
        Self {
            bs_ratio: 0.55,
            detector_efficiency: [1.0, 1.0, 0.7, 1.0],
            depolarization: [0.058, 0.116, 0.042, 0.104],
            z_flip_probability: 0.01,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.bs_ratio > 0.0 && self.bs_ratio < 1.0) {
            return Err(SimError::InvalidModel(format!("bs_ratio {} not in (0,1)", self.bs_ratio)));
        }
        for (i, &eta) in self.detector_efficiency.iter().enumerate() {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(SimError::InvalidModel(format!(
                    "detector_efficiency[{i}] = {eta} not in (0,1]"
                )));
            }
        }
        for (i, &d) in self.dark_rate_hz.iter().enumerate() {
            if d < 0.0 {
                return Err(SimError::InvalidModel(format!("dark_rate_hz[{i}] = {d} negative")));
            }
        }
        if !(self.visibility >= 0.0 && self.visibility <= 1.0) {
            return Err(SimError::InvalidModel(format!("visibility {}", self.visibility)));
        }
        if !(0.0..=1.0).contains(&self.z_flip_probability) {
            return Err(SimError::InvalidModel(format!(
                "z_flip_probability {}",
                self.z_flip_probability
            )));
        }
        for (i, &p) in self.depolarization.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidModel(format!(
                    "depolarization[{i}] = {p} not in [0,1]"
                )));
            }
        }
        if self.umzi_delay_ns <= 0.0 || self.pulse_period_ns <= 2.0 * self.umzi_delay_ns {
            return Err(SimError::InvalidModel(
                "pulse period must exceed twice the UMZI delay".into(),
            ));
        }
        Ok(())
    }
}

/// Central-peak polarization state (|H> + e^{-i phi}|V>)/sqrt(2).
pub fn central_peak_state(phi: f64) -> DensityMatrix {
    central_peak_state_with_visibility(phi, 1.0)
}

/// Same with an interference visibility scaling the off-diagonal.
pub fn central_peak_state_with_visibility(phi: f64, visibility: f64) -> DensityMatrix {
    let v = visibility.clamp(0.0, 1.0);
    let off = C64::from_polar(0.5 * v, phi);
    let mat = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), off, off.conj(), c(0.5, 0.0)]);
    DensityMatrix::new(HermitianOperator::new(mat).expect("hermitian by construction"))
        .expect("valid state by construction")
}

fn rotation_y(angle: f64) -> DMatrix<C64> {
    // Bloch-sphere rotation about y; acts on H/V amplitudes.
    let (s, co) = (angle / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

fn rotation_x(angle: f64) -> DMatrix<C64> {
    let (s, co) = (angle / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// Unnormalized detection effects composed from branch weight, waveplate
/// rotations and per-channel efficiency, order (D, A, L, R).
pub fn raw_effects(model: &DeviceModel) -> Result<Vec<HermitianOperator>, SimError> {
    model.validate()?;
    let [sx, sy, _] = pauli_matrices();
    let eye = DMatrix::<C64>::identity(2, 2);
    // Ideal projectors: |D><D| etc. via (I + axis.sigma)/2.
    let proj_d = (&eye + &sx) * c(0.5, 0.0);
    let proj_a = (&eye - &sx) * c(0.5, 0.0);
    let proj_l = (&eye + &sy) * c(0.5, 0.0);
    let proj_r = (&eye - &sy) * c(0.5, 0.0);

    // An HWP angle error eps rotates linear polarization by 2*eps, i.e. a
    // Bloch rotation of 4*eps about y; a QWP error tilts the circular basis
    // by 2*eps about x.
    let u_x = rotation_y(4.0 * model.hwp_error_deg.to_radians());
    let u_y = rotation_x(2.0 * model.qwp_error_deg.to_radians());
    let rot = |u: &DMatrix<C64>, p: &DMatrix<C64>| -> DMatrix<C64> { u * p * u.adjoint() };

    let b = model.bs_ratio;
    let eta = model.detector_efficiency;
    let mats = [
        rot(&u_x, &proj_d) * c(eta[0] * b, 0.0),
        rot(&u_x, &proj_a) * c(eta[1] * b, 0.0),
        rot(&u_y, &proj_l) * c(eta[2] * (1.0 - b), 0.0),
        rot(&u_y, &proj_r) * c(eta[3] * (1.0 - b), 0.0),
    ];
    mats.into_iter()
        .zip(model.depolarization)
        .map(|(m, p)| {
            // Depolarization keeps the weight Tr(Pi) but shrinks the Bloch
            // vector: Pi -> (1-p) Pi + p Tr(Pi) I/2.
            let trace = m.trace().re;
            let depol = &m * c(1.0 - p, 0.0) + &eye * c(p * trace / 2.0, 0.0);
            HermitianOperator::new(depol).map_err(SimError::from)
        })
        .collect()
}

/// Ground-truth POVM of the modeled receiver: the raw effects
/// completeness-normalized by the inverse square root of their sum.
pub fn ground_truth_povms(model: &DeviceModel) -> Result<Povm, SimError> {
    let raw = raw_effects(model)?;
    Ok(project_to_valid_povm(&raw)?)
}
