use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::quantum::C64;

use super::sdp::{find_interior, Problem};
use super::{SecurityError, SecurityInput};

/// Density matrix from a 16-parameter lower-triangular factor:
/// rho = L L^dag / Tr(L L^dag), PSD and unit-trace by construction.
fn rho_from_params(params: &[f64; 16]) -> DMatrix<C64> {
    let mut l = DMatrix::<C64>::zeros(4, 4);
    // 4 real diagonal entries, 6 complex strictly-lower entries.
    let mut idx = 4;
    for i in 0..4 {
        l[(i, i)] = C64::new(params[i], 0.0);
        for j in 0..i {
            l[(i, j)] = C64::new(params[idx], params[idx + 1]);
            idx += 2;
        }
    }
    let m = &l * l.adjoint();
    let tr = m.trace().re.max(1e-300);
    m / C64::new(tr, 0.0)
}

/// Penalized objective: C plus a quadratic penalty on interval violations.
fn penalized(p: &Problem, params: &[f64; 16], penalty: f64) -> f64 {
    let x = p.coords(&rho_from_params(params));
    let s = p.slacks(&x);
    let w = p.widths();
    let mut val = p.objective(&x);
    for i in 0..s.len() {
        let viol = (s[i].abs() - w[i]).max(0.0);
        val += penalty * viol * viol;
    }
    val
}

/// Independent verification oracle: randomized multi-start numeric descent
/// over the factorized state, then an exact feasibility polish (projection
/// onto the equality slice, mixed toward a strictly interior state). The
/// returned value is the C of a feasible state, i.e. a guaranteed upper
/// bound on the true minimum.
pub fn brute_force_c_min(
    input: &SecurityInput,
    resolution: usize,
) -> Result<f64, SecurityError> {
    input.validate()?;
    let p = Problem::build(input)?;
    let x_int = find_interior(&p)?;
    let starts = resolution.max(1);
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_0bac);

    let mut best_params = [0.0f64; 16];
    let mut best_val = f64::INFINITY;
    for start in 0..starts {
        let mut params = [0.0f64; 16];
        if start == 0 {
            // Deterministic start: the maximally mixed state.
            params[..4].copy_from_slice(&[0.5, 0.5, 0.5, 0.5]);
        } else {
            for q in params.iter_mut() {
                *q = rng.gen_range(-1.0..1.0);
            }
        }
        let mut step = 0.05;
        let mut penalty = 1e2;
        let mut val = penalized(&p, &params, penalty);
        for iter in 0..1500 {
            // Central-difference gradient.
            let mut grad = [0.0f64; 16];
            for q in 0..16 {
                let h = 1e-6;
                let mut plus = params;
                plus[q] += h;
                let mut minus = params;
                minus[q] -= h;
                grad[q] = (penalized(&p, &plus, penalty) - penalized(&p, &minus, penalty))
                    / (2.0 * h);
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < 1e-10 {
                break;
            }
            let mut cand = params;
            for q in 0..16 {
                cand[q] -= step * grad[q] / norm;
            }
            let cand_val = penalized(&p, &cand, penalty);
            if cand_val < val {
                params = cand;
                val = cand_val;
                step = (step * 1.2).min(0.2);
            } else {
                step *= 0.5;
                if step < 1e-10 {
                    break;
                }
            }
            if iter % 300 == 299 {
                penalty = (penalty * 10.0).min(1e6);
                val = penalized(&p, &params, penalty);
            }
        }
        let final_val = penalized(&p, &params, 1e6);
        if final_val < best_val {
            best_val = final_val;
            best_params = params;
        }
    }

    // Feasibility polish: project onto the equality slice, then mix
    // toward the interior point until the state is PSD again. Both end
    // points satisfy the interval constraints, so the mixture does too.
    let x_raw = p.coords(&rho_from_params(&best_params));
    let x_proj = p.project_to_equalities(&x_raw);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mix = |gamma: f64| &x_proj * (1.0 - gamma) + &x_int * gamma;
    let gamma = if p.min_eig(&x_proj) >= 1e-12 {
        0.0
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if p.min_eig(&mix(mid)) >= 1e-12 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(p.objective(&mix(gamma)))
}
