//! Periodic solutions by harmonic balance (HB).
//!
//! A periodic response is expanded in truncated Fourier series,
//!
//! ```text
//! u_i(t) = a0_i + Σ_h [ a_{h,i} cos(hωt) + b_{h,i} sin(hωt) ],   h = 1..H,
//! ```
//!
//! and the equations of motion are Galerkin-projected in frequency. Linear
//! terms assemble exactly per harmonic; the polynomial forces are evaluated
//! by alternating frequency/time (AFT): inverse DFT to `N_t` equispaced
//! samples, pointwise evaluation, forward DFT. A cubic force spreads energy
//! up to harmonic `3H`, so `N_t = max(8H, 32)` keeps the retained band
//! alias-free.

mod continuation;
mod march;

pub use continuation::{continue_frf, solve_at_phase, ContinuationConfig};
pub use march::{default_march_cycles, time_march};

use nalgebra::{DMatrix, DVector, LU};
use thiserror::Error;

use crate::dynsys::SecondOrderSystem;
use crate::scalar::Real;

/// Errors from harmonic-balance solvers.
#[derive(Debug, Error)]
pub enum HbError {
    #[error("orbit has {got} dofs, system has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("continuation step collapsed below {min_step:.3e} near ω = {omega:.6e}")]
    StepCollapse { omega: f64, min_step: f64 },
    #[error("phase undefined: first harmonic of dof {dof} vanishes")]
    PhaseUndefined { dof: usize },
    #[error("phase {phi:.4} rad not bracketed by the continuation branch")]
    PhaseNotBracketed { phi: f64 },
    #[error("singular harmonic-balance Jacobian at ω = {omega:.6e}")]
    SingularJacobian { omega: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Periodic solution stored as truncated Fourier coefficients.
///
/// Coefficients are dof-major: for each dof, `a0, a_1..a_H, b_1..b_H`
/// (`a` cosine amplitudes, `b` sine amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierOrbit<T> {
    n_dof: usize,
    n_harmonics: usize,
    omega: T,
    coeffs: DVector<T>,
}

impl<T: Real> FourierOrbit<T> {
    pub fn zero(n_dof: usize, n_harmonics: usize, omega: T) -> Self {
        assert!(n_harmonics >= 1, "need at least one harmonic");
        assert!(omega > T::zero(), "angular frequency must be positive");
        let len = n_dof * (2 * n_harmonics + 1);
        Self {
            n_dof,
            n_harmonics,
            omega,
            coeffs: DVector::zeros(len),
        }
    }

    pub fn from_coeffs(
        n_dof: usize,
        n_harmonics: usize,
        omega: T,
        coeffs: DVector<T>,
    ) -> Result<Self, HbError> {
        let expected = n_dof * (2 * n_harmonics + 1);
        if coeffs.len() != expected {
            return Err(HbError::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        let mut orbit = Self::zero(n_dof, n_harmonics, omega);
        orbit.coeffs = coeffs;
        Ok(orbit)
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }
    pub fn n_harmonics(&self) -> usize {
        self.n_harmonics
    }
    pub fn omega(&self) -> T {
        self.omega
    }
    /// Dof-major coefficient vector.
    pub fn coeffs(&self) -> &DVector<T> {
        &self.coeffs
    }

    fn base(&self, dof: usize) -> usize {
        dof * (2 * self.n_harmonics + 1)
    }

    pub fn a0(&self, dof: usize) -> T {
        self.coeffs[self.base(dof)]
    }
    /// Cosine amplitude of harmonic `h` (1-based).
    pub fn a(&self, dof: usize, h: usize) -> T {
        self.coeffs[self.base(dof) + h]
    }
    /// Sine amplitude of harmonic `h` (1-based).
    pub fn b(&self, dof: usize, h: usize) -> T {
        self.coeffs[self.base(dof) + self.n_harmonics + h]
    }
    pub fn set_a0(&mut self, dof: usize, v: T) {
        let i = self.base(dof);
        self.coeffs[i] = v;
    }
    pub fn set_a(&mut self, dof: usize, h: usize, v: T) {
        let i = self.base(dof) + h;
        self.coeffs[i] = v;
    }
    pub fn set_b(&mut self, dof: usize, h: usize, v: T) {
        let i = self.base(dof) + self.n_harmonics + h;
        self.coeffs[i] = v;
    }

    /// Magnitude of the first harmonic of one dof.
    pub fn first_harmonic_amplitude(&self, dof: usize) -> T {
        let (a, b) = (self.a(dof, 1), self.b(dof, 1));
        (a * a + b * b).sqrt()
    }
    /// Magnitude of harmonic `h` of one dof.
    pub fn harmonic_amplitude(&self, dof: usize, h: usize) -> T {
        let (a, b) = (self.a(dof, h), self.b(dof, h));
        (a * a + b * b).sqrt()
    }

    /// Displacement of one dof at phase τ = ωt.
    pub fn eval_dof(&self, dof: usize, tau: T) -> T {
        let mut v = self.a0(dof);
        for h in 1..=self.n_harmonics {
            let ht = T::of(h as f64) * tau;
            v += self.a(dof, h) * ht.cos() + self.b(dof, h) * ht.sin();
        }
        v
    }

    /// Peak |u| of one dof over a sampled period.
    pub fn peak_amplitude(&self, dof: usize, n_t: usize) -> T {
        let mut peak = T::zero();
        for k in 0..n_t {
            let tau = T::of(2.0) * T::pi() * T::of(k as f64) / T::of(n_t as f64);
            peak = peak.max(self.eval_dof(dof, tau).abs());
        }
        peak
    }

    /// Harmonic-major solver state `[a0; a1; b1; …; aH; bH]`, each block `n_dof` long.
    pub(crate) fn state(&self) -> DVector<T> {
        let n = self.n_dof;
        let nh = self.n_harmonics;
        let mut x = DVector::zeros(n * (2 * nh + 1));
        for dof in 0..n {
            x[dof] = self.a0(dof);
            for h in 1..=nh {
                x[(2 * h - 1) * n + dof] = self.a(dof, h);
                x[2 * h * n + dof] = self.b(dof, h);
            }
        }
        x
    }

    pub(crate) fn from_state(n_dof: usize, n_harmonics: usize, omega: T, x: &DVector<T>) -> Self {
        let mut orbit = Self::zero(n_dof, n_harmonics, omega);
        for dof in 0..n_dof {
            orbit.set_a0(dof, x[dof]);
            for h in 1..=n_harmonics {
                orbit.set_a(dof, h, x[(2 * h - 1) * n_dof + dof]);
                orbit.set_b(dof, h, x[2 * h * n_dof + dof]);
            }
        }
        orbit
    }
}

/// Evaluates the Fourier series at `n_t` equispaced phases over one period,
/// τ_k = 2πk/n_t. Columns are time samples.
pub fn sample_orbit<T: Real>(orbit: &FourierOrbit<T>, n_t: usize) -> DMatrix<T> {
    assert!(n_t >= 2, "need at least two samples");
    let n = orbit.n_dof();
    let mut out = DMatrix::zeros(n, n_t);
    for k in 0..n_t {
        let tau = T::of(2.0) * T::pi() * T::of(k as f64) / T::of(n_t as f64);
        for dof in 0..n {
            out[(dof, k)] = orbit.eval_dof(dof, tau);
        }
    }
    out
}

/// Phase lag of the first harmonic of `dof` relative to the cos(ωt) forcing,
/// folded into [0, π].
///
/// With `a` the cosine and `b` the sine amplitude, `u ≈ A cos(ωt − φ)` gives
/// `φ = atan2(b, a)`; a lag of π/2 at linear resonance.
pub fn extract_phase<T: Real>(orbit: &FourierOrbit<T>, dof: usize) -> Result<T, HbError> {
    let (a, b) = (orbit.a(dof, 1), orbit.b(dof, 1));
    if a == T::zero() && b == T::zero() {
        return Err(HbError::PhaseUndefined { dof });
    }
    let mut phi = b.atan2(a);
    if phi < T::zero() {
        phi += T::pi();
    }
    Ok(phi)
}

/// Number of AFT collocation samples for `h` retained harmonics.
pub fn aft_samples(n_harmonics: usize) -> usize {
    (8 * n_harmonics).max(32)
}

/// Trigonometric collocation tables for the AFT transforms.
struct AftTables<T> {
    /// `basis[r][k]`: value of basis function r at τ_k (synthesis).
    basis: Vec<Vec<T>>,
    /// `weights[r][k]`: forward-projection weights (analysis).
    weights: Vec<Vec<T>>,
    n_t: usize,
}

impl<T: Real> AftTables<T> {
    fn new(n_harmonics: usize, n_t: usize) -> Self {
        let rows = 2 * n_harmonics + 1;
        let mut basis = vec![vec![T::zero(); n_t]; rows];
        let mut weights = vec![vec![T::zero(); n_t]; rows];
        let inv = T::one() / T::of(n_t as f64);
        let two = T::of(2.0);
        for k in 0..n_t {
            let tau = two * T::pi() * T::of(k as f64) * inv;
            basis[0][k] = T::one();
            weights[0][k] = inv;
            for h in 1..=n_harmonics {
                let ht = T::of(h as f64) * tau;
                basis[2 * h - 1][k] = ht.cos();
                basis[2 * h][k] = ht.sin();
                weights[2 * h - 1][k] = two * inv * ht.cos();
                weights[2 * h][k] = two * inv * ht.sin();
            }
        }
        Self {
            basis,
            weights,
            n_t,
        }
    }
}

fn check_compat<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    orbit: &FourierOrbit<T>,
) -> Result<(), HbError> {
    if sys.n_dof() != orbit.n_dof() {
        return Err(HbError::DimensionMismatch {
            expected: sys.n_dof(),
            got: orbit.n_dof(),
        });
    }
    Ok(())
}

/// Frequency-domain residual of the equations of motion for a trial orbit.
///
/// Harmonic-major blocks: mean, then (cos, sin) per harmonic. The forcing
/// `β f cos(ωt)` enters the first cosine block only.
pub fn hb_residual<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    orbit: &FourierOrbit<T>,
    beta: T,
) -> Result<DVector<T>, HbError> {
    check_compat(sys, orbit)?;
    let nh = orbit.n_harmonics();
    let tables = AftTables::new(nh, aft_samples(nh));
    let x = orbit.state();
    Ok(residual_state(sys, &x, orbit.omega(), beta, nh, &tables))
}

/// Residual in harmonic-major state coordinates.
fn residual_state<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    x: &DVector<T>,
    omega: T,
    beta: T,
    n_harmonics: usize,
    tables: &AftTables<T>,
) -> DVector<T> {
    let n = sys.n_dof();
    let (m, c, k) = (sys.mass(), sys.damping(), sys.stiffness());
    let mut r = DVector::zeros(n * (2 * n_harmonics + 1));

    // Linear terms, block-exact per harmonic.
    let a0 = x.rows(0, n);
    r.rows_mut(0, n).copy_from(&(k * a0));
    for h in 1..=n_harmonics {
        let hw = T::of(h as f64) * omega;
        let ah = x.rows((2 * h - 1) * n, n);
        let bh = x.rows(2 * h * n, n);
        let rc = k * ah - m * ah * (hw * hw) + c * bh * hw;
        let rs = k * bh - m * bh * (hw * hw) - c * ah * hw;
        r.rows_mut((2 * h - 1) * n, n).copy_from(&rc);
        r.rows_mut(2 * h * n, n).copy_from(&rs);
    }

    // Forcing β f cos(ωt).
    let f = sys.forcing_shape();
    for i in 0..n {
        r[n + i] -= beta * f[i];
    }

    // Nonlinear terms by AFT.
    if sys.has_nonlinearity() {
        let mut u = DVector::zeros(n);
        let mut fnl = DVector::zeros(n);
        for kk in 0..tables.n_t {
            synth_sample(x, n, n_harmonics, tables, kk, &mut u);
            fnl.fill(T::zero());
            sys.add_nl_force(&u, &mut fnl);
            for row in 0..(2 * n_harmonics + 1) {
                let w = tables.weights[row][kk];
                if w != T::zero() {
                    for i in 0..n {
                        r[row * n + i] += w * fnl[i];
                    }
                }
            }
        }
    }
    r
}

/// Time sample u(τ_k) from harmonic-major state.
fn synth_sample<T: Real>(
    x: &DVector<T>,
    n: usize,
    n_harmonics: usize,
    tables: &AftTables<T>,
    k: usize,
    out: &mut DVector<T>,
) {
    for i in 0..n {
        out[i] = x[i];
    }
    for row in 1..(2 * n_harmonics + 1) {
        let b = tables.basis[row][k];
        for i in 0..n {
            out[i] += b * x[row * n + i];
        }
    }
}

/// Dense HB Jacobian ∂r/∂x in harmonic-major coordinates.
fn jacobian_state<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    x: &DVector<T>,
    omega: T,
    n_harmonics: usize,
    tables: &AftTables<T>,
) -> DMatrix<T> {
    let n = sys.n_dof();
    let rows = 2 * n_harmonics + 1;
    let (m, c, k) = (sys.mass(), sys.damping(), sys.stiffness());
    let mut jac = DMatrix::zeros(rows * n, rows * n);

    jac.view_mut((0, 0), (n, n)).copy_from(k);
    for h in 1..=n_harmonics {
        let hw = T::of(h as f64) * omega;
        let diag = k - m * (hw * hw);
        let (rc, rs) = ((2 * h - 1) * n, 2 * h * n);
        jac.view_mut((rc, rc), (n, n)).copy_from(&diag);
        jac.view_mut((rs, rs), (n, n)).copy_from(&diag);
        jac.view_mut((rc, rs), (n, n)).copy_from(&(c * hw));
        jac.view_mut((rs, rc), (n, n)).copy_from(&(-c * hw));
    }

    if sys.has_nonlinearity() {
        let mut u = DVector::zeros(n);
        let mut jnl = DMatrix::zeros(n, n);
        for kk in 0..tables.n_t {
            synth_sample(x, n, n_harmonics, tables, kk, &mut u);
            jnl.fill(T::zero());
            sys.add_nl_jacobian(&u, &mut jnl);
            for row in 0..rows {
                let w = tables.weights[row][kk];
                if w == T::zero() {
                    continue;
                }
                for col in 0..rows {
                    let v = tables.basis[col][kk];
                    if v == T::zero() {
                        continue;
                    }
                    let coef = w * v;
                    let mut block = jac.view_mut((row * n, col * n), (n, n));
                    for q in 0..n {
                        for p in 0..n {
                            block[(p, q)] += coef * jnl[(p, q)];
                        }
                    }
                }
            }
        }
    }
    jac
}

/// ∂r/∂ω (the AFT part is ω-independent in coefficient space).
fn residual_domega<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    x: &DVector<T>,
    omega: T,
    n_harmonics: usize,
) -> DVector<T> {
    let n = sys.n_dof();
    let (m, c) = (sys.mass(), sys.damping());
    let mut d = DVector::zeros(n * (2 * n_harmonics + 1));
    for h in 1..=n_harmonics {
        let hf = T::of(h as f64);
        let hw = hf * omega;
        let ah = x.rows((2 * h - 1) * n, n);
        let bh = x.rows(2 * h * n, n);
        let dc = -m * ah * (T::of(2.0) * hw * hf) + c * bh * hf;
        let ds = -m * bh * (T::of(2.0) * hw * hf) - c * ah * hf;
        d.rows_mut((2 * h - 1) * n, n).copy_from(&dc);
        d.rows_mut(2 * h * n, n).copy_from(&ds);
    }
    d
}

/// Residual scale used for relative convergence checks.
fn force_scale<T: Real, S: SecondOrderSystem<T>>(sys: &S, beta: T) -> T {
    let fnorm = sys.forcing_shape().norm() * beta.abs();
    if fnorm > T::zero() {
        fnorm
    } else {
        T::one()
    }
}

/// Newton iteration controls for a single HB solve.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOpts<T> {
    /// Convergence threshold, relative to the forcing magnitude.
    pub tol: T,
    pub max_iters: usize,
}

impl<T: Real> Default for NewtonOpts<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-10),
            max_iters: 25,
        }
    }
}

/// Newton iteration on the HB residual at fixed (ω, β).
pub fn hb_solve<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    omega: T,
    beta: T,
    guess: &FourierOrbit<T>,
    opts: &NewtonOpts<T>,
) -> Result<FourierOrbit<T>, HbError> {
    check_compat(sys, guess)?;
    let nh = guess.n_harmonics();
    let n = sys.n_dof();
    let tables = AftTables::new(nh, aft_samples(nh));
    let scale = force_scale(sys, beta);
    let tol = opts.tol * scale;

    let mut x = guess.state();
    let mut r = residual_state(sys, &x, omega, beta, nh, &tables);
    let mut rnorm = r.norm();
    for iter in 0..opts.max_iters {
        if rnorm <= tol {
            return Ok(FourierOrbit::from_state(n, nh, omega, &x));
        }
        let jac = jacobian_state(sys, &x, omega, nh, &tables);
        let lu = LU::new(jac);
        let Some(dx) = lu.solve(&r) else {
            return Err(HbError::SingularJacobian {
                omega: omega.to64(),
            });
        };
        // Backtracking line search keeps Newton from overshooting folds.
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..5 {
            let x_try = &x - &dx * step;
            let r_try = residual_state(sys, &x_try, omega, beta, nh, &tables);
            let rn_try = r_try.norm();
            if rn_try < rnorm || rn_try <= tol {
                x = x_try;
                r = r_try;
                rnorm = rn_try;
                accepted = true;
                break;
            }
            step *= T::of(0.5);
        }
        if !accepted {
            return Err(HbError::NonConvergence {
                iterations: iter + 1,
                residual: rnorm.to64(),
            });
        }
    }
    if rnorm <= tol {
        return Ok(FourierOrbit::from_state(n, nh, omega, &x));
    }
    Err(HbError::NonConvergence {
        iterations: opts.max_iters,
        residual: rnorm.to64(),
    })
}

/// Exact forced response of the linearized system (G, H dropped); the
/// standard warm start for Newton.
pub fn linear_hb_solve<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    omega: T,
    beta: T,
    n_harmonics: usize,
) -> Result<FourierOrbit<T>, HbError> {
    let n = sys.n_dof();
    let (m, c, k) = (sys.mass(), sys.damping(), sys.stiffness());
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    let diag = k - m * (omega * omega);
    block.view_mut((0, 0), (n, n)).copy_from(&diag);
    block.view_mut((n, n), (n, n)).copy_from(&diag);
    block.view_mut((0, n), (n, n)).copy_from(&(c * omega));
    block.view_mut((n, 0), (n, n)).copy_from(&(-c * omega));
    let mut rhs = DVector::zeros(2 * n);
    for i in 0..n {
        rhs[i] = beta * sys.forcing_shape()[i];
    }
    let lu = LU::new(block);
    let sol = lu.solve(&rhs).ok_or(HbError::SingularJacobian {
        omega: omega.to64(),
    })?;
    let mut orbit = FourierOrbit::zero(n, n_harmonics, omega);
    for i in 0..n {
        orbit.set_a(i, 1, sol[i]);
        orbit.set_b(i, 1, sol[n + i]);
    }
    Ok(orbit)
}

/// Work done by the forcing `β f cos(ωt)` over one period: `π β fᵀ b₁`.
pub fn forcing_work_per_period<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    orbit: &FourierOrbit<T>,
    beta: T,
) -> T {
    let n = sys.n_dof();
    let f = sys.forcing_shape();
    let mut dot = T::zero();
    for i in 0..n {
        dot += f[i] * orbit.b(i, 1);
    }
    T::pi() * beta * dot
}

/// Energy dissipated by the damping matrix over one period:
/// `π ω Σ_h h² (a_hᵀ C a_h + b_hᵀ C b_h)`.
pub fn dissipation_per_period<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    orbit: &FourierOrbit<T>,
) -> T {
    let n = sys.n_dof();
    let c = sys.damping();
    let mut total = T::zero();
    for h in 1..=orbit.n_harmonics() {
        let mut ah = DVector::zeros(n);
        let mut bh = DVector::zeros(n);
        for i in 0..n {
            ah[i] = orbit.a(i, h);
            bh[i] = orbit.b(i, h);
        }
        let quad = ah.dot(&(c * &ah)) + bh.dot(&(c * &bh));
        total += T::of((h * h) as f64) * quad;
    }
    T::pi() * orbit.omega() * total
}

#[cfg(test)]
mod tests;
