use nalgebra::{DMatrix, DVector};

use crate::quantum::{kron, pauli_matrices, DensityMatrix, HermitianOperator, Povm, C64};

use super::{delta_finite_key, key_rate, SecurityError};

/// Width used for "equality" constraints: a hair of slack keeps a strict
/// interior even when the data pin a unique (possibly singular) state.
const EQUALITY_WIDTH: f64 = 1e-8;

/// Observed statistics and settings for one C-minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityInput {
    /// Z-basis QBER.
    pub e_zz: f64,
    /// Conditional frequencies p_{+,j} over channels (D, A, L, R).
    pub p_plus: [f64; 4],
    /// Detections behind the channel frequencies.
    pub k: u64,
    /// Coincidences behind the QBER estimate (defaults to `k`).
    pub k_z: Option<u64>,
    pub epsilon: f64,
    pub finite_key: bool,
    /// Pin Alice's marginal Tr((P_+ (x) 1) rho) = 1/2 (source replacement
    /// of the |+> preparation); exposed for sensitivity analysis.
    pub pin_marginal: bool,
    /// Bob's measurement; enters the constraints only.
    pub povm: Povm,
}

impl SecurityInput {
    pub fn validate(&self) -> Result<(), SecurityError> {
        if !(0.0..=0.5).contains(&self.e_zz) {
            return Err(SecurityError::DomainError(format!("e_zz {} not in [0,0.5]", self.e_zz)));
        }
        let sum: f64 = self.p_plus.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || self.p_plus.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(SecurityError::DomainError(format!(
                "p_plus must be frequencies summing to 1, got sum {sum}"
            )));
        }
        if self.k < 1 {
            return Err(SecurityError::DomainError("k must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SecurityError::DomainError(format!("epsilon {}", self.epsilon)));
        }
        if self.povm.dim() != 2 {
            return Err(SecurityError::DomainError("POVM must act on one qubit".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
}

impl SolverStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIterations => "max-iterations",
        }
    }
}

/// Outcome of one window's minimization with the derived key quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityResult {
    pub c_min: f64,
    pub e_zz: f64,
    pub mu: f64,
    pub nu: f64,
    pub i_e: f64,
    pub r: f64,
    pub delta: f64,
    pub k: u64,
    pub solver_status: SolverStatus,
    /// Upper bound on the optimality gap from the barrier parameter.
    pub duality_gap: f64,
    pub above_qber_bound: bool,
    pub witness_state: DensityMatrix,
}

/// Orthonormal Hermitian basis sigma_i (x) sigma_j / 2 of two-qubit
/// operator space; index a = 4 i + j, a = 0 is the normalized identity.
fn pauli_basis() -> Vec<DMatrix<C64>> {
    let [sx, sy, sz] = pauli_matrices();
    let eye = DMatrix::<C64>::identity(2, 2);
    let singles = [eye, sx, sy, sz];
    let mut basis = Vec::with_capacity(16);
    for a in &singles {
        for b in &singles {
            basis.push(kron(a, b) * C64::new(0.5, 0.0));
        }
    }
    basis
}

/// Free-coordinate indices of the objective C = 4 (th_xx^2 + th_xy^2 +
/// th_yx^2 + th_yy^2): basis indices 5, 6, 9, 10 minus the fixed identity.
const OBJ_COORDS: [usize; 4] = [4, 5, 8, 9];

pub(crate) struct Problem {
    basis: Vec<DMatrix<C64>>,
    /// Constraint rows over the 15 free coordinates.
    g: DMatrix<f64>,
    /// Targets with the fixed-trace offset removed.
    y: DVector<f64>,
    /// Interval half-widths.
    w: DVector<f64>,
}

impl Problem {
    pub(crate) fn build(input: &SecurityInput) -> Result<Self, SecurityError> {
        let basis = pauli_basis();
        let [sx, _, sz] = pauli_matrices();
        let eye = DMatrix::<C64>::identity(2, 2);
        let p_plus_op = (&eye + &sx) * C64::new(0.5, 0.0);

        let delta_p = if input.finite_key {
            // Conditional frequencies map to joint probabilities at
            // alpha = 1/2, so the relaxation width scales the same way.
            0.5 * delta_finite_key(input.k, input.epsilon)?
        } else {
            0.0
        };
        let delta_e = if input.finite_key {
            delta_finite_key(input.k_z.unwrap_or(input.k), input.epsilon)?
        } else {
            0.0
        };

        let mut ops: Vec<(DMatrix<C64>, f64, f64)> = Vec::new();
        for (j, effect) in input.povm.elements().iter().enumerate() {
            ops.push((
                kron(&p_plus_op, effect.matrix()),
                0.5 * input.p_plus[j],
                delta_p.max(EQUALITY_WIDTH),
            ));
        }
        if input.pin_marginal {
            ops.push((kron(&p_plus_op, &eye), 0.5, EQUALITY_WIDTH));
        }
        let e_zz_op = (DMatrix::<C64>::identity(4, 4) - kron(&sz, &sz)) * C64::new(0.5, 0.0);
        ops.push((e_zz_op, input.e_zz, delta_e.max(EQUALITY_WIDTH)));

        let n = ops.len();
        let mut g = DMatrix::zeros(n, 15);
        let mut y = DVector::zeros(n);
        let mut w = DVector::zeros(n);
        for (i, (op, target, width)) in ops.iter().enumerate() {
            for a in 1..16 {
                g[(i, a - 1)] = (op * &basis[a]).trace().re;
            }
            // Fixed identity coordinate theta_0 = 1/2 contributes Tr(op)/4.
            y[i] = target - op.trace().re / 4.0;
            w[i] = *width;
        }

        // The constraint operators are linearly dependent for equatorial
        // POVMs (e.g. Pi_D + Pi_A is proportional to the identity), so
        // measured frequencies violate the implied consistency relations
        // by shot noise and make exact equalities infeasible. Project the
        // targets onto the attainable subspace when the inconsistency is
        // within the sampling scale; refuse beyond it.
        let g_pinv = g.clone().pseudo_inverse(1e-12).expect("eps positive");
        let y_proj = &g * (&g_pinv * &y);
        let residual = (&y - &y_proj).amax();
        let tolerance = (5.0 / (input.k as f64).sqrt()).max(1e-9);
        if residual > tolerance {
            return Err(SecurityError::InconsistentData { residual, tolerance });
        }
        Ok(Self { basis, g, y: y_proj, w })
    }

    pub(crate) fn rho(&self, x: &DVector<f64>) -> DMatrix<C64> {
        let mut rho = &self.basis[0] * C64::new(0.5, 0.0);
        for a in 1..16 {
            rho += &self.basis[a] * C64::new(x[a - 1], 0.0);
        }
        rho
    }

    /// Free coordinates of a density matrix.
    pub(crate) fn coords(&self, rho: &DMatrix<C64>) -> DVector<f64> {
        DVector::from_fn(15, |a, _| (rho * &self.basis[a + 1]).trace().re)
    }

    pub(crate) fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.g * x - &self.y
    }

    pub(crate) fn widths(&self) -> &DVector<f64> {
        &self.w
    }

    /// Orthogonal projection onto the equality slice G x = y.
    pub(crate) fn project_to_equalities(&self, x: &DVector<f64>) -> DVector<f64> {
        let g_pinv = self.g.clone().pseudo_inverse(1e-12).expect("eps positive");
        x - g_pinv * (&self.g * x - &self.y)
    }

    pub(crate) fn min_eig(&self, x: &DVector<f64>) -> f64 {
        HermitianOperator::new(self.rho(x)).expect("hermitian by construction").min_eigenvalue()
    }

    fn strictly_feasible(&self, x: &DVector<f64>) -> bool {
        let s = self.slacks(x);
        for i in 0..s.len() {
            if s[i].abs() >= self.w[i] {
                return false;
            }
        }
        self.min_eig(x) > 0.0
    }

    pub(crate) fn objective(&self, x: &DVector<f64>) -> f64 {
        4.0 * OBJ_COORDS.iter().map(|&a| x[a] * x[a]).sum::<f64>()
    }
}

fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    HermitianOperator::new(m.clone()).expect("hermitian by construction").eigh()
}

/// Minimum-norm solution of G x = y and an orthonormal basis of the
/// nullspace of G.
fn affine_solution(g: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let dim = g.ncols();
    let g_pinv = g.clone().pseudo_inverse(1e-12).expect("eps positive");
    let x0 = &g_pinv * y;
    let row_proj = &g_pinv * g; // projector onto the row space
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for a in 0..dim {
        let mut e = DVector::zeros(dim);
        e[a] = 1.0;
        let mut r = &e - &row_proj * &e;
        for c in &cols {
            let d: f64 = c.dot(&r);
            r -= c * d;
        }
        if r.norm() > 1e-9 {
            let nrm = r.norm();
            cols.push(r / nrm);
        }
    }
    let null = DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    (x0, null)
}

/// Find a strictly feasible starting point: solve the equalities by least
/// squares, push into the PSD cone by maximizing log det(rho + c I) over
/// the equality slice (Newton, c annealed to ~0), then mix a whisker of
/// the maximally mixed state within the interval slack.
pub(crate) fn find_interior(p: &Problem) -> Result<DVector<f64>, SecurityError> {
    let (x0, null) = affine_solution(&p.g, &p.y);
    let residual = (&p.g * &x0 - &p.y).amax();
    if residual > p.w.min() {
        return Err(SecurityError::Infeasible { lambda_min: f64::NEG_INFINITY });
    }

    let nz = null.ncols();
    let mut z = DVector::<f64>::zeros(nz);
    let x_of = |z: &DVector<f64>| &x0 + &null * z;

    let mut c = 1.0f64;
    for _level in 0..200 {
        if c <= 1e-12 || p.min_eig(&x_of(&z)) > 1e-3 {
            break;
        }
        // Newton ascent of the concave F(z) = log det(rho(x0 + N z) + cI).
        for _ in 0..40 {
            let m = p.rho(&x_of(&z)) + DMatrix::<C64>::identity(4, 4) * C64::new(c, 0.0);
            let (vals, vecs) = eigh(&m);
            if vals.iter().any(|&v| v <= 0.0) {
                break;
            }
            let mut m_inv = DMatrix::<C64>::zeros(4, 4);
            for (i, &v) in vals.iter().enumerate() {
                let col = vecs.column(i);
                m_inv += (&col * col.adjoint()) * C64::new(1.0 / v, 0.0);
            }
            let inv_b: Vec<DMatrix<C64>> = (1..16).map(|a| &m_inv * &p.basis[a]).collect();
            let gx = DVector::from_fn(15, |a, _| inv_b[a].trace().re);
            let mut hx = DMatrix::zeros(15, 15);
            for a in 0..15 {
                for b in a..15 {
                    hx[(a, b)] = -(&inv_b[a] * &inv_b[b]).trace().re;
                    hx[(b, a)] = hx[(a, b)];
                }
            }
            let gz = null.transpose() * &gx;
            let hz = null.transpose() * &hx * &null;
            let d = newton_direction(&(-hz), &(-gz.clone()));
            let decrement_sq = gz.dot(&d);
            if decrement_sq <= 1e-13 {
                break;
            }
            let mut t = 1.0;
            let base = vals.iter().map(|v| v.ln()).sum::<f64>();
            let mut moved = false;
            while t > 1e-12 {
                let cand = &z + &d * t;
                let mc =
                    p.rho(&x_of(&cand)) + DMatrix::<C64>::identity(4, 4) * C64::new(c, 0.0);
                let (cv, _) = eigh(&mc);
                if cv.iter().all(|&v| v > 0.0) {
                    let val = cv.iter().map(|v| v.ln()).sum::<f64>();
                    if val >= base + 0.1 * t * decrement_sq {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // The next level must keep rho + cI positive at the current
        // iterate, so c can never drop below -lambda_min; contract toward
        // that floor when a tenfold cut would overshoot it.
        let lam = p.min_eig(&x_of(&z));
        let floor = (-lam).max(0.0);
        let mut c_next = (c * 0.1).max(1.5 * floor);
        if c_next >= c {
            c_next = 0.5 * (c + floor);
        }
        c = c_next;
    }

    let mut x = x_of(&z);
    let mut lambda = p.min_eig(&x);

    if lambda < 1e-6 {
        // Mix toward the maximally mixed state: slacks become
        // (1-gamma) s_i - gamma y_i, which must stay inside the intervals;
        // spend 90% of the tightest interval budget on the eigenvalue lift.
        let s = p.slacks(&x);
        let mut gamma: f64 = 0.45;
        for i in 0..p.w.len() {
            let budget = (p.w[i] - s[i].abs()).max(0.0);
            let drift = p.y[i].abs() + s[i].abs();
            if drift > 0.0 {
                gamma = gamma.min(0.9 * budget / drift);
            }
        }
        let cand = &x * (1.0 - gamma);
        let cand_lambda = p.min_eig(&cand);
        if cand_lambda > lambda {
            x = cand;
            lambda = cand_lambda;
        }
    }
    if lambda <= 0.0 || !p.strictly_feasible(&x) {
        return Err(SecurityError::Infeasible { lambda_min: lambda });
    }
    Ok(x)
}

/// Barrier value, gradient and Hessian of tau*C(x) + Phi(x) with
/// Phi = -log det rho - sum_i log(w_i^2 - s_i^2). None when infeasible.
fn barrier_parts(
    p: &Problem,
    x: &DVector<f64>,
    tau: f64,
) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
    let rho = p.rho(x);
    let (vals, vecs) = eigh(&rho);
    if vals.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let logdet: f64 = vals.iter().map(|v| v.ln()).sum();
    let mut rho_inv = DMatrix::<C64>::zeros(4, 4);
    for (i, &v) in vals.iter().enumerate() {
        let col = vecs.column(i);
        rho_inv += (&col * col.adjoint()) * C64::new(1.0 / v, 0.0);
    }

    let s = p.slacks(x);
    let mut value = tau * p.objective(x) - logdet;
    let mut grad = DVector::zeros(15);
    let mut hess = DMatrix::zeros(15, 15);

    for &a in &OBJ_COORDS {
        grad[a] += tau * 8.0 * x[a];
        hess[(a, a)] += tau * 8.0;
    }

    let inv_b: Vec<DMatrix<C64>> = (1..16).map(|a| &rho_inv * &p.basis[a]).collect();
    for a in 0..15 {
        grad[a] -= inv_b[a].trace().re;
        for b in a..15 {
            let h = (&inv_b[a] * &inv_b[b]).trace().re;
            hess[(a, b)] += h;
            hess[(b, a)] = hess[(a, b)];
        }
    }

    for i in 0..s.len() {
        let (si, wi) = (s[i], p.w[i]);
        let gap = wi * wi - si * si;
        if gap <= 0.0 {
            return None;
        }
        value -= gap.ln();
        let d1 = 2.0 * si / gap;
        let d2 = 2.0 * (wi * wi + si * si) / (gap * gap);
        let gi = p.g.row(i).transpose();
        grad += &gi * d1;
        hess += &gi * gi.transpose() * d2;
    }
    Some((value, grad, hess))
}

/// Solve H d = -g robustly: eigendecompose the symmetric Hessian and clamp
/// tiny or negative eigenvalues (roundoff at extreme conditioning).
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let eig = hess.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let floor = 1e-14 * max;
    let mut d = DVector::zeros(grad.len());
    for i in 0..grad.len() {
        let li = eig.eigenvalues[i].max(floor);
        let vi = eig.eigenvectors.column(i);
        let coeff: f64 = vi.dot(grad) / li;
        d -= vi * coeff;
    }
    d
}

/// Minimize C over two-qubit states consistent with the observed
/// statistics (interval constraints in finite-key mode) by a log-det
/// barrier interior-point method. Deterministic for identical inputs.
pub fn minimize_c(input: &SecurityInput) -> Result<SecurityResult, SecurityError> {
    input.validate()?;
    let p = Problem::build(input)?;
    let mut x = find_interior(&p)?;

    // Total barrier degree: 4 (log det) + 2 per two-sided interval; the
    // certified gap at a centered point is nu/tau.
    let nu_total = 4.0 + 2.0 * p.w.len() as f64;
    let gap_target = 1e-7;
    let tau_max = nu_total / gap_target;
    let mut tau = 1.0;
    let mut status = SolverStatus::Converged;

    loop {
        let mut centered = false;
        for _ in 0..100 {
            let Some((value, grad, hess)) = barrier_parts(&p, &x, tau) else {
                break;
            };
            let d = newton_direction(&hess, &grad);
            let decrement_sq = -grad.dot(&d);
            if decrement_sq <= 1e-12 {
                centered = true;
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-14 {
                let cand = &x + &d * t;
                if p.strictly_feasible(&cand) {
                    if let Some((cand_value, _, _)) = barrier_parts(&p, &cand, tau) {
                        if cand_value <= value - 0.01 * t * decrement_sq {
                            x = cand;
                            moved = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !moved {
                // Accept the current iterate; extreme conditioning near a
                // singular witness can exhaust the line search.
                centered = decrement_sq <= 1e-6;
                break;
            }
        }
        if !centered {
            status = SolverStatus::MaxIterations;
        }
        if tau >= tau_max {
            break;
        }
        tau = (tau * 10.0).min(tau_max);
    }
    let duality_gap = nu_total / tau;

    let rho = p.rho(&x);
    let witness = DensityMatrix::new(HermitianOperator::new(rho)?)?;
    let c_min = p.objective(&x).clamp(0.0, 2.0);

    let kq = key_rate(c_min, input.e_zz)?;
    let delta = delta_finite_key(input.k, input.epsilon)?;
    Ok(SecurityResult {
        c_min,
        e_zz: input.e_zz,
        mu: kq.mu,
        nu: kq.nu,
        i_e: kq.i_e,
        r: kq.r,
        delta,
        k: input.k,
        solver_status: status,
        duality_gap,
        above_qber_bound: kq.above_qber_bound,
        witness_state: witness,
    })
}
