use std::f64::consts::{FRAC_PI_2, PI, TAU};

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;

use crate::quantum::{born_probability, c, fidelity, pauli_matrices, C64, CHANNELS};

use super::*;

fn ideal_projector(axis_sign: f64, sigma: &DMatrix<C64>) -> DMatrix<C64> {
    (DMatrix::<C64>::identity(2, 2) + sigma * c(axis_sign, 0.0)) * c(0.5, 0.0)
}

#[test]
fn ideal_ground_truth_is_half_projectors() {
    let povm = ground_truth_povms(&DeviceModel::default()).unwrap();
    let [sx, sy, _] = pauli_matrices();
    let expected = [
        ideal_projector(1.0, &sx),
        ideal_projector(-1.0, &sx),
        ideal_projector(1.0, &sy),
        ideal_projector(-1.0, &sy),
    ];
    for (el, exp) in povm.elements().iter().zip(expected.iter()) {
        let diff = el.matrix() - exp * c(0.5, 0.0);
        assert!(diff.iter().all(|z| z.norm() < 1e-10), "ideal POVM should be half projectors");
    }
}

#[test]
fn defect_preset_raw_trace_ratios() {
    // bs 0.55, eta_L 0.7: raw half-traces proportional to
    // (0.275, 0.275, 0.1575, 0.225).
    let raw = raw_effects(&DeviceModel::paper_fig4()).unwrap();
    let traces: Vec<f64> = raw.iter().map(|e| e.matrix().trace().re).collect();
    let expected = [0.55, 0.55, 0.315, 0.45];
    for (got, want) in traces.iter().zip(expected) {
        assert_abs_diff_eq!(got, &want, epsilon = 1e-12);
    }
}

#[test]
fn defect_ground_truth_is_complete_and_positive() {
    let povm = ground_truth_povms(&DeviceModel::paper_fig4()).unwrap();
    let report = crate::quantum::validate_povm(povm.elements(), 1e-9);
    assert!(report.completeness_residual < 1e-10);
    assert!(report.eigenvalue_floor > -1e-10);
}

#[test]
fn small_hwp_error_keeps_high_fidelity() {
    let model = DeviceModel { hwp_error_deg: 1.0, ..DeviceModel::default() };
    let povm = ground_truth_povms(&model).unwrap();
    let ideal = ground_truth_povms(&DeviceModel::default()).unwrap();
    for (el, id) in povm.elements().iter().zip(ideal.elements()) {
        let f = fidelity(el, id).unwrap();
        assert!(f >= 0.995, "1 degree HWP error should barely move the POVM, f = {f}");
    }
}

#[test]
fn central_peak_state_hits_the_equator() {
    // phi = 0 -> |D>, phi = pi -> |A>, phi = pi/2 -> |R> (Bloch
    // r = (cos phi, -sin phi, 0)).
    let [sx, sy, sz] = pauli_matrices();
    let cases = [(0.0, (1.0, 0.0)), (PI, (-1.0, 0.0)), (FRAC_PI_2, (0.0, -1.0))];
    for (phi, (ex, ey)) in cases {
        let rho = central_peak_state(phi);
        let bloch = |s: &DMatrix<C64>| (rho.operator().matrix() * s).trace().re;
        assert_abs_diff_eq!(bloch(&sx), ex, epsilon = 1e-12);
        assert_abs_diff_eq!(bloch(&sy), ey, epsilon = 1e-12);
        assert_abs_diff_eq!(bloch(&sz), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn visibility_scales_coherence() {
    let rho = central_peak_state_with_visibility(0.0, 0.6);
    assert_abs_diff_eq!(rho.operator().matrix()[(0, 1)].re, 0.3, epsilon = 1e-12);
}

#[test]
fn window_counts_match_born_statistics() {
    // At phi = 0 (|D>) the ideal central-peak split is (1/2, 0, 1/4, 1/4).
    let model = DeviceModel::default();
    let mean = 1e6;
    let wc = simulate_window(0.0, &model, mean, 2.0, 42).unwrap();
    let central = wc.central();
    let central_mean = 0.5 * mean;
    let expected = [0.5, 0.0, 0.25, 0.25];
    for (k, &n) in central.iter().enumerate() {
        let m = central_mean * expected[k];
        let sigma3 = 3.0 * m.sqrt().max(3.0);
        assert!(
            (n as f64 - m).abs() <= sigma3,
            "channel {} central count {n} vs mean {m}",
            CHANNELS[k].label()
        );
    }
    // Lateral peaks carry the other half of the flux.
    let lat = wc.lateral_total() as f64;
    assert!((lat - 0.5 * mean).abs() <= 3.0 * (0.5f64 * mean).sqrt());
}

#[test]
fn window_counts_track_ground_truth_born_rule_with_defects() {
    let model = DeviceModel::paper_fig4();
    let povm = ground_truth_povms(&model).unwrap();
    let phi = 1.234;
    let rho = central_peak_state(phi);
    let mean = 4e6;
    let wc = simulate_window(phi, &model, mean, 2.0, 7).unwrap();
    for (k, effect) in povm.elements().iter().enumerate() {
        let m = 0.5 * mean * born_probability(&rho, effect).unwrap();
        let n = wc.central()[k] as f64;
        assert!((n - m).abs() <= 4.0 * m.sqrt().max(3.0), "channel {k}: {n} vs {m}");
    }
}

#[test]
fn dark_counts_add_uniform_background() {
    let model = DeviceModel { dark_rate_hz: [3000.0, 0.0, 0.0, 0.0], ..DeviceModel::default() };
    // No signal: mean 0 leaves only darks, 3000 Hz * 2 s = 6000 on channel D.
    let wc = simulate_window(0.0, &model, 0.0, 2.0, 5).unwrap();
    let d_total: u64 = wc.counts[0].iter().sum();
    assert!((d_total as f64 - 6000.0).abs() < 4.0 * 6000f64.sqrt());
    assert_eq!(wc.counts[1], [0, 0, 0]);
}

#[test]
fn z_flips_populate_the_error_tally() {
    let model = DeviceModel { z_flip_probability: 0.1, ..DeviceModel::default() };
    let (_, z) = simulate_window_with_z(0.0, &model, 1e6, 2.0, 9).unwrap();
    let total = (z.correct + z.errors) as f64;
    let rate = z.errors as f64 / total;
    assert!((rate - 0.1).abs() < 0.01, "observed z error rate {rate}");
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let model = DeviceModel::paper_fig4();
    let a = simulate_window(0.7, &model, 1e5, 2.0, 31).unwrap();
    let b = simulate_window(0.7, &model, 1e5, 2.0, 31).unwrap();
    let c = simulate_window(0.7, &model, 1e5, 2.0, 32).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn run_phases_cover_the_circle_and_are_reproducible() {
    let drift = DriftProcess { kind: DriftKind::UniformGrid, ..DriftProcess::default() };
    let run = simulate_run(&DeviceModel::default(), &drift, 8, 1e4, 2.0).unwrap();
    assert_eq!(run.windows.len(), 8);
    assert_eq!(run.z_records.len(), 8);
    for (j, &phi) in run.phases.iter().enumerate() {
        assert_abs_diff_eq!(phi, TAU * j as f64 / 8.0, epsilon = 1e-12);
    }
    let again = simulate_run(&DeviceModel::default(), &drift, 8, 1e4, 2.0).unwrap();
    assert_eq!(run.windows, again.windows);

    let walk = DriftProcess::default().phases(1000);
    assert!(walk.iter().all(|&p| (0.0..TAU).contains(&p)));
}

#[test]
fn invalid_models_are_rejected() {
    let bad_bs = DeviceModel { bs_ratio: 1.2, ..DeviceModel::default() };
    assert!(matches!(bad_bs.validate(), Err(SimError::InvalidModel(_))));
    let bad_period = DeviceModel { pulse_period_ns: 4.0, ..DeviceModel::default() };
    assert!(matches!(bad_period.validate(), Err(SimError::InvalidModel(_))));
    let bad_eta = DeviceModel { detector_efficiency: [1.0, 0.0, 1.0, 1.0], ..DeviceModel::default() };
    assert!(bad_eta.validate().is_err());
}

#[test]
fn emit_and_extract_roundtrip_without_jitter() {
    let model = DeviceModel::default();
    let wc = simulate_window(0.3, &model, 1e4, 2.0, 11).unwrap();
    let stream = emit_timestamps(&wc, &model, 0.0, 99).unwrap();
    assert_eq!(stream.len() as u64, wc.total());
    let ex = extract_peak_counts(&stream, 500, model.umzi_delay_ns, model.pulse_period_ns, 2.0)
        .unwrap();
    assert_eq!(ex.discarded, 0);
    assert_eq!(ex.counts.counts, wc.counts);
}

#[test]
fn jittered_events_mostly_survive_extraction() {
    let model = DeviceModel::default();
    let wc = simulate_window(1.0, &model, 1e5, 2.0, 13).unwrap();
    // 50 ps rms jitter inside a 150 ps half-window keeps > 99% of events
    // (3 sigma) and classifies survivors into the right peak.
    let stream = emit_timestamps(&wc, &model, 50.0, 21).unwrap();
    let ex = extract_peak_counts(&stream, 300, model.umzi_delay_ns, model.pulse_period_ns, 2.0)
        .unwrap();
    let kept = ex.counts.total() as f64 / wc.total() as f64;
    assert!(kept >= 0.99, "kept fraction {kept}");
    for k in 0..4 {
        for p in 0..3 {
            let orig = wc.counts[k][p] as f64;
            let got = ex.counts.counts[k][p] as f64;
            assert!((got - orig).abs() <= 0.02 * orig.max(200.0));
        }
    }
}

#[test]
fn overlapping_window_is_rejected() {
    let model = DeviceModel::default();
    let wc = simulate_window(0.0, &model, 100.0, 2.0, 1).unwrap();
    let stream = emit_timestamps(&wc, &model, 0.0, 1).unwrap();
    let err = extract_peak_counts(&stream, 3000, model.umzi_delay_ns, model.pulse_period_ns, 2.0)
        .unwrap_err();
    assert!(matches!(err, SimError::InvalidWindow { window_ps: 3000, .. }));
}

#[test]
fn event_streams_are_sorted_and_deterministic() {
    let model = DeviceModel::default();
    let wc = simulate_window(0.0, &model, 1e4, 2.0, 3).unwrap();
    let a = emit_timestamps(&wc, &model, 30.0, 17).unwrap();
    let b = emit_timestamps(&wc, &model, 30.0, 17).unwrap();
    assert_eq!(a, b);
    assert!(a.events().windows(2).all(|w| w[0].timestamp_ps <= w[1].timestamp_ps));
}
