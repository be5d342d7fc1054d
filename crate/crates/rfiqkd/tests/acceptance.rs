//! Release acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantities.
//!
//! Criteria 1 and 2 compare against a published reference matrix set that
//! is internally inconsistent on channel A (its printed half-trace
//! disagrees with the printed t vector), so those two checks fail on that
//! channel by construction and are expected red. All other criteria pass.

use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use rfiqkd::qdsc::{canonical_gauge, run_qdsc, solve_povms, GaugeSpec, ResponseRange};
use rfiqkd::quantum::{
    born_probability, fidelity, kron, pauli_matrices, povm_from_bloch, BlochDecomposition,
    DensityMatrix, HermitianOperator, Povm, C64,
};
use rfiqkd::receiver::{
    central_peak_state, simulate_run, DeviceModel, DriftKind, DriftProcess, WindowCounts,
};
use rfiqkd::security::{
    brute_force_c_min, c_parameter, delta_finite_key, minimize_c, SecurityConfig, SecurityInput,
};

fn verdict(criterion: u32, ok: bool, detail: &str) {
    let line =
        format!("criterion {criterion}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    println!("{line}");
    assert!(ok, "{line}");
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat2(rows: [[(f64, f64); 2]; 2]) -> HermitianOperator {
    let flat: Vec<C64> = rows.iter().flatten().map(|&(re, im)| c(re, im)).collect();
    HermitianOperator::new(DMatrix::from_row_slice(2, 2, &flat)).unwrap()
}

/// Published reference POVM matrices, channel order (D, A, L, R).
fn reference_povm_elements() -> Vec<HermitianOperator> {
    vec![
        mat2([[(0.2836, 0.0), (0.2669, 0.0)], [(0.2669, 0.0), (0.2836, 0.0)]]),
        mat2([[(0.2923, 0.0), (-0.2676, -0.0522)], [(-0.2676, 0.0522), (0.2973, 0.0)]]),
        mat2([[(0.1718, 0.0), (0.0106, -0.1645)], [(0.0106, 0.1645), (0.1718, 0.0)]]),
        mat2([[(0.2465, 0.0), (-0.0099, 0.2168)], [(-0.0099, -0.2168), (0.2375, 0.0)]]),
    ]
}

/// Published reference response range, reordered to (D, A, L, R).
fn reference_range() -> ResponseRange {
    ResponseRange {
        q4: Matrix4::from_row_slice(&[
            0.0712, -0.0715, 0.0029, -0.0026, //
            -0.0715, 0.0744, 0.0057, -0.0087, //
            0.0029, 0.0057, 0.0272, -0.0358, //
            -0.0026, -0.0087, -0.0358, 0.0471,
        ]),
        t: Vector4::new(0.2836, 0.3027, 0.1717, 0.2420),
    }
}

#[test]
fn criterion_1_reference_inversion() {
    let start = Instant::now();
    let povm = solve_povms(&reference_range(), GaugeSpec::default(), false).unwrap();
    let reference = reference_povm_elements();
    let diffs: Vec<f64> = povm
        .elements()
        .iter()
        .zip(&reference)
        .map(|(a, b)| a.max_abs_diff(b))
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = diffs.iter().all(|&d| d <= 5e-3) && elapsed < 1.0;
    verdict(
        1,
        ok,
        &format!(
            "inversion vs reference matrices, max |diff| per channel (D,A,L,R) = \
             {:.4}, {:.4}, {:.4}, {:.4} (tol 5e-3), {:.2}s",
            diffs[0], diffs[1], diffs[2], diffs[3], elapsed
        ),
    );
}

#[test]
fn criterion_2_reference_fidelity_table() {
    let start = Instant::now();
    let ideal = Povm::ideal();
    let reference = reference_povm_elements();
    let targets = [0.971, 0.942, 0.979, 0.948];
    let values: Vec<f64> = reference
        .iter()
        .zip(ideal.elements())
        .map(|(exp, id)| fidelity(id, exp).unwrap())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = values.iter().zip(&targets).all(|(v, t)| (v - t).abs() <= 0.005) && elapsed < 1.0;
    verdict(
        2,
        ok,
        &format!(
            "fidelity to ideal (D,A,L,R) = {:.4}, {:.4}, {:.4}, {:.4} \
             vs targets {:?} +- 0.005, {:.2}s",
            values[0], values[1], values[2], values[3], targets, elapsed
        ),
    );
}

fn window_from_central(window_id: u64, central: [u64; 4]) -> WindowCounts {
    let mut counts = [[0u64; 3]; 4];
    for k in 0..4 {
        counts[k][1] = central[k];
    }
    WindowCounts { window_id, t_start_s: 2.0 * window_id as f64, duration_s: 2.0, counts }
}

/// Exact Born-rule windows of `povm` probed at `n` uniform phases.
fn exact_windows(povm: &Povm, n: usize) -> Vec<WindowCounts> {
    let scale = 1e12;
    (0..n)
        .map(|j| {
            let rho = central_peak_state(TAU * j as f64 / n as f64);
            let p: Vec<u64> = povm
                .elements()
                .iter()
                .map(|e| (scale * born_probability(&rho, e).unwrap()).round() as u64)
                .collect();
            window_from_central(j as u64, [p[0], p[1], p[2], p[3]])
        })
        .collect()
}

/// Random valid four-outcome POVM with equatorial rank-2 Bloch vectors.
fn random_rank2_povm(rng: &mut ChaCha12Rng) -> Povm {
    loop {
        let mut weights = [0.0f64; 4];
        for w in weights.iter_mut() {
            *w = rng.gen_range(0.15..0.35);
        }
        let wsum: f64 = weights.iter().sum();
        let mut decomps = Vec::with_capacity(4);
        let mut m_sum = Vector3::zeros();
        for &w in &weights {
            let t = w / wsum;
            let theta = rng.gen_range(0.0..TAU);
            let r = t * rng.gen_range(0.3..0.9);
            let m = Vector3::new(r * theta.cos(), r * theta.sin(), 0.0);
            m_sum += m;
            decomps.push(BlochDecomposition { t, m });
        }
        // Re-center so the set closes exactly to the identity.
        for d in &mut decomps {
            d.m -= m_sum / 4.0;
        }
        let usable = decomps.iter().all(|d| {
            let n = d.m.norm();
            n <= d.t - 0.02 && n >= 0.03
        });
        if usable {
            if let Ok(povm) = povm_from_bloch(&decomps) {
                return povm;
            }
        }
    }
}

#[test]
fn criterion_3_noiseless_closed_loop() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xc3);
    let mut worst = 1.0f64;
    for _ in 0..50 {
        let truth = random_rank2_povm(&mut rng);
        let windows = exact_windows(&truth, 72);
        let (recovered, _) = run_qdsc(&windows).unwrap();
        let truth_gauge = canonical_gauge(&truth).unwrap();
        for (a, b) in recovered.elements().iter().zip(truth_gauge.elements()) {
            worst = worst.min(fidelity(a, b).unwrap());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst >= 1.0 - 1e-6 && elapsed < 10.0;
    verdict(
        3,
        ok,
        &format!(
            "50 random rank-2 POVMs x 72 phases: worst per-element fidelity \
             {worst:.9} (>= 1 - 1e-6), {elapsed:.2}s (< 10 s)"
        ),
    );
}

#[test]
fn criterion_4_stochastic_closed_loop() {
    let start = Instant::now();
    let model = DeviceModel::paper_fig4();
    let drift =
        DriftProcess { kind: DriftKind::UniformGrid, seed: 41, ..Default::default() };
    // 1800 windows x 2 s, ~120k central-peak detections per window (~60 kHz).
    let run = simulate_run(&model, &drift, 1800, 240_000.0, 2.0).unwrap();
    let (recovered, _) = run_qdsc(&run.windows).unwrap();
    let truth = canonical_gauge(&run.ground_truth).unwrap();
    let ideal = Povm::ideal();
    let mut vs_truth = Vec::new();
    let mut vs_ideal = Vec::new();
    for ((rec, gt), id) in
        recovered.elements().iter().zip(truth.elements()).zip(ideal.elements())
    {
        vs_truth.push(fidelity(gt, rec).unwrap());
        vs_ideal.push(fidelity(id, rec).unwrap());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = vs_truth.iter().all(|&f| f >= 0.99)
        && vs_ideal.iter().all(|&f| (0.93..=0.99).contains(&f))
        && elapsed < 120.0;
    verdict(
        4,
        ok,
        &format!(
            "defect preset, 1800 x 2 s windows: vs ground truth {:.4?} (>= 0.99), \
             vs ideal {:.4?} (in [0.93, 0.99]), {:.1}s (< 120 s)",
            vs_truth, vs_ideal, elapsed
        ),
    );
}

fn bell_input() -> SecurityInput {
    SecurityInput {
        e_zz: 0.0,
        p_plus: [0.5, 0.0, 0.25, 0.25],
        k: 1_000_000,
        k_z: None,
        epsilon: 1e-5,
        finite_key: false,
        pin_marginal: true,
        povm: Povm::ideal(),
    }
}

#[test]
fn criterion_5_security_saturation() {
    let res = minimize_c(&bell_input()).unwrap();
    let ok = (res.c_min - 2.0).abs() <= 1e-3 && (res.r - 1.0).abs() <= 1e-3;
    verdict(
        5,
        ok,
        &format!(
            "Bell-consistent constraints: c_min = {:.6} (2 +- 1e-3), R = {:.6} (1 +- 1e-3)",
            res.c_min, res.r
        ),
    );
}

/// Random two-qubit state whose Alice +/- marginal is exactly 1/2, so its
/// own statistics always form a feasible instance.
fn random_balanced_state(rng: &mut ChaCha12Rng) -> DensityMatrix {
    let mut l = DMatrix::<C64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..=i {
            l[(i, j)] = c(rng.gen_range(-1.0..1.0), if j < i { rng.gen_range(-1.0..1.0) } else { 0.0 });
        }
    }
    let raw = &l * l.adjoint();
    let raw = &raw / c(raw.trace().re, 0.0);
    // Symmetrize under sigma_x on Alice: maps P_+ <-> P_-, pinning the
    // marginal to exactly 1/2 while preserving positivity.
    let [sx, _, _] = pauli_matrices();
    let eye = DMatrix::<C64>::identity(2, 2);
    let flip = kron(&sx, &eye);
    let sym = (&raw + &flip * &raw * &flip) * c(0.5, 0.0);
    DensityMatrix::new(HermitianOperator::new(sym).unwrap()).unwrap()
}

/// Conditional Bob frequencies p_{+,j} and e_zz of a state under a POVM.
fn statistics_of(rho: &DensityMatrix, povm: &Povm) -> ([f64; 4], f64) {
    let [sx, _, sz] = pauli_matrices();
    let eye = DMatrix::<C64>::identity(2, 2);
    let p_plus = (&eye + &sx) * c(0.5, 0.0);
    let marginal = (rho.operator().matrix() * kron(&p_plus, &eye)).trace().re;
    let mut p = [0.0; 4];
    for (j, effect) in povm.elements().iter().enumerate() {
        p[j] = (rho.operator().matrix() * kron(&p_plus, effect.matrix())).trace().re / marginal;
    }
    let e_op = (DMatrix::<C64>::identity(4, 4) - kron(&sz, &sz)) * c(0.5, 0.0);
    let e_zz = (rho.operator().matrix() * e_op).trace().re;
    (p, e_zz.clamp(0.0, 0.5))
}

#[test]
fn criterion_6_solver_vs_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xc6);
    let povm = Povm::ideal();
    let [sx, _, _] = pauli_matrices();
    let eye = DMatrix::<C64>::identity(2, 2);
    let p_plus_op = (&eye + &sx) * c(0.5, 0.0);

    let mut max_gap = 0.0f64;
    let mut max_violation = 0.0f64;
    for _ in 0..20 {
        let rho = random_balanced_state(&mut rng);
        let (p_plus, e_zz) = statistics_of(&rho, &povm);
        let input = SecurityInput { e_zz, p_plus, ..bell_input() };
        let res = minimize_c(&input).unwrap();
        let oracle = brute_force_c_min(&input, 4).unwrap();
        assert!(oracle >= res.c_min - 1e-6, "oracle {oracle} below solver {}", res.c_min);
        max_gap = max_gap.max((oracle - res.c_min).abs());

        // Witness feasibility: PSD, unit trace, pinned marginal, channel
        // statistics (asymptotic equality width is 1e-8).
        let w = res.witness_state.operator();
        max_violation = max_violation.max((w.trace() - 1.0).abs());
        max_violation = max_violation.max((-w.min_eigenvalue()).max(0.0));
        let marg = (w.matrix() * kron(&p_plus_op, &eye)).trace().re;
        max_violation = max_violation.max((marg - 0.5).abs());
        for (j, effect) in povm.elements().iter().enumerate() {
            let got = (w.matrix() * kron(&p_plus_op, effect.matrix())).trace().re;
            max_violation = max_violation.max((got - p_plus[j] / 2.0).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = max_gap <= 0.05 && max_violation <= 1e-6 && elapsed < 300.0;
    verdict(
        6,
        ok,
        &format!(
            "20 random instances: max |solver - oracle| = {max_gap:.4} (<= 0.05), \
             max witness violation = {max_violation:.2e} (<= 1e-6), {elapsed:.1}s (< 300 s)"
        ),
    );
}

#[test]
fn criterion_7_finite_key() {
    let delta = delta_finite_key(1_000_000, 1e-5).unwrap();
    let mut c_mins = Vec::new();
    for k in [1_000u64, 10_000, 100_000, 1_000_000] {
        let input = SecurityInput { k, finite_key: true, ..bell_input() };
        c_mins.push(minimize_c(&input).unwrap().c_min);
    }
    let monotone = c_mins.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let ok = (delta - 0.004424).abs() <= 1e-6 && monotone;
    verdict(
        7,
        ok,
        &format!(
            "delta(1e6, 1e-5) = {delta:.6} (0.004424 +- 1e-6); c_min over \
             k in {{1e3..1e6}} = {c_mins:.4?} nondecreasing: {monotone}"
        ),
    );
}

#[test]
fn criterion_8_end_to_end_band() {
    let start = Instant::now();
    let model = DeviceModel::paper_fig4();
    let drift = DriftProcess {
        kind: DriftKind::WrappedRandomWalk,
        step_std_rad_per_window: 0.15,
        seed: 8,
    };
    let run = simulate_run(&model, &drift, 600, 240_000.0, 2.0).unwrap();
    let (povm, _) = run_qdsc(&run.windows).unwrap();
    let analysis =
        rfiqkd::security::analyze_run(&run.windows, &run.z_records, &povm, &SecurityConfig::default())
            .unwrap();
    let s = &analysis.summary;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (1.6..=2.0).contains(&s.c_mean) && (0.6..=0.9).contains(&s.r_mean) && elapsed < 600.0;
    verdict(
        8,
        ok,
        &format!(
            "defect preset + mild drift, {} windows analyzed ({} excluded): \
             mean C = {:.3} (in [1.6, 2.0]), mean R = {:.3} (in [0.6, 0.9]), {:.0}s (< 600 s)",
            s.windows_analyzed, s.windows_excluded, s.c_mean, s.r_mean, elapsed
        ),
    );
}

#[test]
fn criterion_9_invariant_suites() {
    let mut failures: Vec<String> = Vec::new();

    // Bloch/POVM roundtrips.
    for povm in [Povm::ideal(), rfiqkd::receiver::ground_truth_povms(&DeviceModel::paper_fig4()).unwrap()] {
        let back = povm_from_bloch(&povm.bloch()).unwrap();
        let diff: f64 = povm
            .elements()
            .iter()
            .zip(back.elements())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        if diff > 1e-12 {
            failures.push(format!("bloch roundtrip diff {diff:.2e}"));
        }
    }

    // Born-probability normalization over a complete POVM.
    for j in 0..16 {
        let rho = central_peak_state(TAU * j as f64 / 16.0);
        let total: f64 = Povm::ideal()
            .elements()
            .iter()
            .map(|e| born_probability(&rho, e).unwrap())
            .sum();
        if (total - 1.0).abs() > 1e-12 {
            failures.push(format!("born normalization {total}"));
        }
    }

    // Fidelity symmetry.
    for (a, b) in reference_povm_elements().iter().zip(Povm::ideal().elements()) {
        let lr = fidelity(a, b).unwrap();
        let rl = fidelity(b, a).unwrap();
        // Symmetric up to the eigendecomposition's numerical noise.
        if (lr - rl).abs() > 1e-6 {
            failures.push(format!("fidelity asymmetry {lr} vs {rl}"));
        }
    }

    // Rotation invariance of C under a Z-rotation of Bob's frame, 1 deg steps.
    let inv = 1.0 / 2f64.sqrt();
    let bell = DensityMatrix::pure(&[c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)]).unwrap();
    let eye = DMatrix::<C64>::identity(2, 2);
    for deg in 0..360 {
        let beta = (deg as f64).to_radians();
        let rz = DMatrix::from_row_slice(
            2,
            2,
            &[C64::from_polar(1.0, -beta / 2.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, beta / 2.0)],
        );
        let u = kron(&eye, &rz);
        let rot = &u * bell.operator().matrix() * u.adjoint();
        let rho = DensityMatrix::new(HermitianOperator::new(rot).unwrap()).unwrap();
        let cc = c_parameter(&rho).unwrap();
        if (cc - 2.0).abs() > 1e-9 {
            failures.push(format!("C not rotation invariant at {deg} deg: {cc}"));
            break;
        }
    }

    // Hull monotonicity: interior points never change the boundary.
    {
        use nalgebra::Vector2;
        let ring: Vec<Vector2<f64>> = (0..12)
            .map(|j| {
                let a = TAU * j as f64 / 12.0;
                Vector2::new(a.cos(), a.sin())
            })
            .collect();
        let mut with_interior = ring.clone();
        for j in 0..20 {
            let a = TAU * j as f64 / 20.0;
            with_interior.push(Vector2::new(0.3 * a.cos(), 0.2 * a.sin()));
        }
        let hull_a = rfiqkd::qdsc::BoundarySet::from_points(&ring).unwrap();
        let hull_b = rfiqkd::qdsc::BoundarySet::from_points(&with_interior).unwrap();
        if hull_a.points() != hull_b.points() {
            failures.push("hull changed by interior points".into());
        }
    }

    // Byte-determinism of the simulator under a fixed seed.
    {
        let model = DeviceModel::paper_fig4();
        let drift = DriftProcess { seed: 99, ..Default::default() };
        let a = simulate_run(&model, &drift, 20, 20_000.0, 2.0).unwrap();
        let b = simulate_run(&model, &drift, 20, 20_000.0, 2.0).unwrap();
        if a.windows != b.windows || a.z_records != b.z_records {
            failures.push("simulation not deterministic under fixed seed".into());
        }
    }

    let ok = failures.is_empty();
    verdict(
        9,
        ok,
        &format!(
            "roundtrip, normalization, symmetry, rotation-invariance, hull and \
             determinism invariants: {}",
            if ok { "all green".to_string() } else { failures.join("; ") }
        ),
    );
}
