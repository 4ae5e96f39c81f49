//! Pseudo-arclength continuation of frequency-response branches.
//!
//! The branch is parameterized in (Fourier coefficients, ω) at fixed load
//! multiplier β. A secant tangent predicts the next point, a Newton
//! corrector solves the residual augmented with the arclength constraint,
//! so folds are traversed like any other point.
//!
//! Coefficients and frequency are scaled to comparable magnitudes before
//! arclength is measured; step lengths in the configuration are in these
//! scaled units.

use nalgebra::{DMatrix, DVector, LU};

use super::{
    aft_samples, extract_phase, force_scale, hb_solve, jacobian_state, linear_hb_solve,
    residual_domega, residual_state, AftTables, FourierOrbit, HbError, NewtonOpts,
};
use crate::dynsys::SecondOrderSystem;
use crate::scalar::Real;

/// Controls for [`continue_frf`]. Steps are scaled arclength.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationConfig<T> {
    pub initial_step: T,
    pub min_step: T,
    pub max_step: T,
    /// Newton tolerance, relative to the forcing magnitude.
    pub newton_tol: T,
    pub max_newton_iters: usize,
    pub max_points: usize,
    /// Retained harmonics for every orbit on the branch.
    pub n_harmonics: usize,
}

impl<T: Real> Default for ContinuationConfig<T> {
    fn default() -> Self {
        Self {
            initial_step: T::of(0.05),
            min_step: T::of(1e-7),
            max_step: T::of(0.25),
            newton_tol: T::of(1e-10),
            max_newton_iters: 15,
            max_points: 4000,
            n_harmonics: 7,
        }
    }
}

impl<T: Real> ContinuationConfig<T> {
    pub fn validate(&self) -> Result<(), HbError> {
        if !(T::zero() < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step)
        {
            return Err(HbError::InvalidConfig(
                "need 0 < min_step <= initial_step <= max_step".into(),
            ));
        }
        if self.newton_tol <= T::zero() {
            return Err(HbError::InvalidConfig("newton_tol must be positive".into()));
        }
        if self.n_harmonics == 0 {
            return Err(HbError::InvalidConfig("need at least one harmonic".into()));
        }
        Ok(())
    }

    fn newton_opts(&self) -> NewtonOpts<T> {
        NewtonOpts {
            tol: self.newton_tol,
            max_iters: self.max_newton_iters,
        }
    }
}

/// Solves at fixed ω from a cold start, ramping β if plain Newton fails.
pub fn solve_cold<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    omega: T,
    beta: T,
    n_harmonics: usize,
    opts: &NewtonOpts<T>,
) -> Result<FourierOrbit<T>, HbError> {
    let guess = linear_hb_solve(sys, omega, beta, n_harmonics)?;
    match hb_solve(sys, omega, beta, &guess, opts) {
        Ok(orbit) => Ok(orbit),
        Err(_) => {
            let mut orbit = FourierOrbit::zero(sys.n_dof(), n_harmonics, omega);
            for step in 1..=8 {
                let b = beta * T::of(step as f64 / 8.0);
                orbit = hb_solve(sys, omega, b, &orbit, opts)?;
            }
            Ok(orbit)
        }
    }
}

/// Traces the frequency-response branch from `omega_start` toward
/// `omega_end`, traversing folds. Returns the ordered orbit list.
pub fn continue_frf<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    beta: T,
    omega_start: T,
    omega_end: T,
    cfg: &ContinuationConfig<T>,
) -> Result<Vec<FourierOrbit<T>>, HbError> {
    cfg.validate()?;
    if omega_start == omega_end {
        return Err(HbError::InvalidConfig(
            "omega_start and omega_end must differ".into(),
        ));
    }
    let n = sys.n_dof();
    let nh = cfg.n_harmonics;
    let tables = AftTables::new(nh, aft_samples(nh));
    let opts = cfg.newton_opts();
    let fs = force_scale(sys, beta);
    let dir = if omega_end > omega_start {
        T::one()
    } else {
        -T::one()
    };
    let omega_scale = omega_start.abs().max(omega_end.abs());
    let span = (omega_end - omega_start).abs();
    let omega_lo = omega_start.min(omega_end) - span * T::of(0.5);
    let omega_hi = omega_start.max(omega_end) + span * T::of(0.5);

    // First point, then a short frequency step for the secant direction.
    let first = solve_cold(sys, omega_start, beta, nh, &opts)?;
    let rms = first.state().norm() / T::of((n * (2 * nh + 1)) as f64).sqrt();
    let amp_scale = if rms > T::zero() { rms } else { T::one() };

    let mut step = cfg.initial_step;
    let second = loop {
        let domega = dir * step * omega_scale;
        match hb_solve(sys, omega_start + domega, beta, &first, &opts) {
            Ok(orbit) => break orbit,
            Err(_) => {
                step *= T::of(0.5);
                if step < cfg.min_step {
                    return Err(HbError::StepCollapse {
                        omega: omega_start.to64(),
                        min_step: cfg.min_step.to64(),
                    });
                }
            }
        }
    };

    let scale_z = |orbit: &FourierOrbit<T>| -> DVector<T> {
        let x = orbit.state();
        let m = x.len();
        let mut z = DVector::zeros(m + 1);
        for i in 0..m {
            z[i] = x[i] / amp_scale;
        }
        z[m] = orbit.omega() / omega_scale;
        z
    };

    let mut points = vec![first, second];
    let mut z_prev = scale_z(&points[0]);
    let mut z_cur = scale_z(&points[1]);
    let mut ds = step;

    loop {
        if points.len() >= cfg.max_points {
            break;
        }
        let last_omega = points.last().expect("nonempty").omega();
        if dir * (last_omega - omega_end) >= T::zero() {
            break;
        }
        if last_omega < omega_lo || last_omega > omega_hi {
            break;
        }

        let mut tangent = &z_cur - &z_prev;
        let tnorm = tangent.norm();
        if tnorm == T::zero() {
            break;
        }
        tangent /= tnorm;

        let mut accepted = None;
        loop {
            match correct_arclength(
                sys, beta, nh, &tables, fs, amp_scale, omega_scale, &z_cur, &tangent, ds, &opts,
            ) {
                Ok((z_new, iters)) if (&z_new - &z_cur).norm() > ds * T::of(1e-3) => {
                    accepted = Some((z_new, iters));
                    break;
                }
                _ => {
                    ds *= T::of(0.5);
                    if ds < cfg.min_step {
                        return Err(HbError::StepCollapse {
                            omega: last_omega.to64(),
                            min_step: cfg.min_step.to64(),
                        });
                    }
                }
            }
        }
        let (z_new, iters) = accepted.expect("loop exits only with a point");

        let m = n * (2 * nh + 1);
        let mut x = DVector::zeros(m);
        for i in 0..m {
            x[i] = z_new[i] * amp_scale;
        }
        let omega_new = z_new[m] * omega_scale;
        points.push(FourierOrbit::from_state(n, nh, omega_new, &x));
        z_prev = z_cur;
        z_cur = z_new;
        if iters <= 3 {
            ds = (ds * T::of(1.3)).min(cfg.max_step);
        }
    }
    Ok(points)
}

/// Newton corrector for the arclength-constrained system.
#[allow(clippy::too_many_arguments)]
fn correct_arclength<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    beta: T,
    nh: usize,
    tables: &AftTables<T>,
    fs: T,
    amp_scale: T,
    omega_scale: T,
    z_base: &DVector<T>,
    tangent: &DVector<T>,
    ds: T,
    opts: &NewtonOpts<T>,
) -> Result<(DVector<T>, usize), HbError> {
    let n = sys.n_dof();
    let m = n * (2 * nh + 1);
    let tol = opts.tol * fs;

    let mut z = z_base + tangent * ds;
    for iter in 0..opts.max_iters {
        let mut x = DVector::zeros(m);
        for i in 0..m {
            x[i] = z[i] * amp_scale;
        }
        let omega = z[m] * omega_scale;
        if omega <= T::zero() {
            return Err(HbError::NonConvergence {
                iterations: iter,
                residual: f64::INFINITY,
            });
        }
        let r = residual_state(sys, &x, omega, beta, nh, tables);
        if r.norm() <= tol {
            return Ok((z, iter));
        }

        let jx = jacobian_state(sys, &x, omega, nh, tables);
        let jw = residual_domega(sys, &x, omega, nh);
        let mut aug = DMatrix::zeros(m + 1, m + 1);
        for col in 0..m {
            for row in 0..m {
                aug[(row, col)] = jx[(row, col)] * amp_scale / fs;
            }
        }
        for row in 0..m {
            aug[(row, m)] = jw[row] * omega_scale / fs;
        }
        for col in 0..=m {
            aug[(m, col)] = tangent[col];
        }
        let mut rhs = DVector::zeros(m + 1);
        for row in 0..m {
            rhs[row] = r[row] / fs;
        }
        rhs[m] = tangent.dot(&(&z - z_base)) - ds;

        let lu = LU::new(aug);
        let Some(dz) = lu.solve(&rhs) else {
            return Err(HbError::SingularJacobian {
                omega: omega.to64(),
            });
        };
        z -= dz;
    }
    Err(HbError::NonConvergence {
        iterations: opts.max_iters,
        residual: f64::NAN,
    })
}

/// Solves the HB system with ω free and the first-harmonic phase of
/// `monitored_dof` pinned to `phi_target`.
///
/// The converged orbit satisfies `extract_phase == phi_target` to solver
/// precision, which is what ties training parameter rows to their orbits.
pub fn solve_at_phase<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    beta: T,
    phi_target: T,
    monitored_dof: usize,
    guess: &FourierOrbit<T>,
    opts: &NewtonOpts<T>,
) -> Result<FourierOrbit<T>, HbError> {
    let n = sys.n_dof();
    let nh = guess.n_harmonics();
    let m = n * (2 * nh + 1);
    let tables = AftTables::new(nh, aft_samples(nh));
    let fs = force_scale(sys, beta);
    let tol = opts.tol * fs;
    let phi_tol = T::of(1e-12);

    let omega_scale = guess.omega();
    let rms = guess.state().norm() / T::of(m as f64).sqrt();
    let amp_scale = if rms > T::zero() { rms } else { T::one() };

    let mut x = guess.state();
    let mut omega = guess.omega();
    for iter in 0..(opts.max_iters * 2) {
        let orbit = FourierOrbit::from_state(n, nh, omega, &x);
        let phi = extract_phase(&orbit, monitored_dof)?;
        let dphi = phi - phi_target;
        let r = residual_state(sys, &x, omega, beta, nh, &tables);
        if r.norm() <= tol && dphi.abs() <= phi_tol {
            return Ok(orbit);
        }

        let jx = jacobian_state(sys, &x, omega, nh, &tables);
        let jw = residual_domega(sys, &x, omega, nh);
        let mut aug = DMatrix::zeros(m + 1, m + 1);
        for col in 0..m {
            for row in 0..m {
                aug[(row, col)] = jx[(row, col)] * amp_scale / fs;
            }
        }
        for row in 0..m {
            aug[(row, m)] = jw[row] * omega_scale / fs;
        }
        // d atan2(b, a) = (-b da + a db) / (a² + b²); folding only shifts by π.
        let (a1, b1) = (orbit.a(monitored_dof, 1), orbit.b(monitored_dof, 1));
        let r2 = a1 * a1 + b1 * b1;
        if r2 == T::zero() {
            return Err(HbError::PhaseUndefined {
                dof: monitored_dof,
            });
        }
        aug[(m, n + monitored_dof)] = -b1 / r2 * amp_scale;
        aug[(m, 2 * n + monitored_dof)] = a1 / r2 * amp_scale;

        let mut rhs = DVector::zeros(m + 1);
        for row in 0..m {
            rhs[row] = r[row] / fs;
        }
        rhs[m] = dphi;

        let lu = LU::new(aug);
        let Some(dz) = lu.solve(&rhs) else {
            return Err(HbError::SingularJacobian {
                omega: omega.to64(),
            });
        };
        for i in 0..m {
            x[i] -= dz[i] * amp_scale;
        }
        omega -= dz[m] * omega_scale;
        if omega <= T::zero() {
            return Err(HbError::NonConvergence {
                iterations: iter,
                residual: f64::INFINITY,
            });
        }
    }
    Err(HbError::NonConvergence {
        iterations: opts.max_iters * 2,
        residual: f64::NAN,
    })
}
