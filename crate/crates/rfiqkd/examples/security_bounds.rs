//! Security quantities from observed statistics: run the convex
//! minimization of the correlation parameter C on ideal Bell-state
//! statistics and on partially depolarized ones, then print the key
//! fraction as a function of C at fixed QBER.

use rfiqkd::quantum::Povm;
use rfiqkd::security::{key_rate, minimize_c, SecurityInput};

fn input(e_zz: f64, p_plus: [f64; 4]) -> SecurityInput {
    SecurityInput {
        e_zz,
        p_plus,
        k: 1_000_000,
        k_z: None,
        epsilon: 1e-5,
        finite_key: false,
        pin_marginal: true,
        povm: Povm::ideal(),
    }
}

fn main() {
    // Bell statistics: C must reach its maximum of 2 and R = 1.
    let res = minimize_c(&input(0.0, [0.5, 0.0, 0.25, 0.25])).expect("feasible");
    println!(
        "Bell statistics:     c_min = {:.6}, R = {:.6}, gap <= {:.1e} ({:?})",
        res.c_min, res.r, res.duality_gap, res.solver_status
    );

    // Depolarized statistics: mix the same frequencies toward uniform.
    for lambda in [0.05, 0.10, 0.20] {
        let mix = |ideal: f64| (1.0 - lambda) * ideal + lambda * 0.25;
        let p = [mix(0.5), mix(0.0), mix(0.25), mix(0.25)];
        let res = minimize_c(&input(lambda / 2.0, p)).expect("feasible");
        println!(
            "depolarized {:.2}:    c_min = {:.6}, e_zz = {:.3}, I_E = {:.6}, R = {:.6}",
            lambda, res.c_min, res.e_zz, res.i_e, res.r
        );
    }

    println!("\nkey fraction at e = 0.02:");
    println!("  C      mu      nu      I_E     R");
    for c in [2.0, 1.8, 1.6, 1.4, 1.2, 1.0] {
        let kf = key_rate(c, 0.02).expect("valid domain");
        println!("  {:.2}   {:.4}  {:.4}  {:.4}  {:+.4}", c, kf.mu, kf.nu, kf.i_e, kf.r);
    }
}
