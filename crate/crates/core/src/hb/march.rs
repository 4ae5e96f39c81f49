//! Time marching to steady state with a constant-average-acceleration
//! implicit scheme, as a cross-check on the harmonic-balance solutions.

use nalgebra::{DMatrix, DVector, LU};

use super::{force_scale, FourierOrbit, HbError};
use crate::dynsys::SecondOrderSystem;
use crate::scalar::Real;

/// Cycle count heuristic for reaching steady state at quality factor `q`:
/// transients decay like exp(-πn/Q).
pub fn default_march_cycles(q: f64) -> usize {
    ((10.0 * q / std::f64::consts::PI).ceil() as usize).max(200)
}

/// Integrates from rest for up to `n_cycles` periods and projects the last
/// period onto Fourier coefficients (harmonics 0..`h_out`).
///
/// Stops early once two successive periods agree to 1e-8 relative in L2.
pub fn time_march<T: Real, S: SecondOrderSystem<T>>(
    sys: &S,
    omega: T,
    beta: T,
    n_cycles: usize,
    steps_per_cycle: usize,
    h_out: usize,
) -> Result<FourierOrbit<T>, HbError> {
    assert!(n_cycles >= 1, "need at least one cycle");
    assert!(steps_per_cycle >= 4, "need at least four steps per cycle");
    assert!(
        steps_per_cycle > 2 * h_out,
        "steps per cycle must resolve the requested harmonics"
    );
    let n = sys.n_dof();
    let (m, c, k) = (sys.mass(), sys.damping(), sys.stiffness());
    let f = sys.forcing_shape();
    let period = T::of(2.0) * T::pi() / omega;
    let dt = period / T::of(steps_per_cycle as f64);
    let fs = force_scale(sys, beta);
    let tol = T::of(1e-12) * fs;

    let m_lu = LU::new(m.clone());
    let mut u = DVector::<T>::zeros(n);
    let mut v = DVector::<T>::zeros(n);
    // Initial acceleration from the equations of motion at t = 0.
    let mut acc = m_lu
        .solve(&(f * beta))
        .ok_or(HbError::SingularJacobian {
            omega: omega.to64(),
        })?;

    let four_dt2 = T::of(4.0) / (dt * dt);
    let two_dt = T::of(2.0) / dt;

    let mut samples = DMatrix::<T>::zeros(n, steps_per_cycle);
    let mut prev_period = DMatrix::<T>::zeros(n, steps_per_cycle);
    let mut nl_f = DVector::<T>::zeros(n);
    let mut step_count: usize = 0;

    for cycle in 0..n_cycles {
        for kk in 0..steps_per_cycle {
            samples.set_column(kk, &u);
            let t1 = dt * T::of((step_count + 1) as f64);
            let load = f * (beta * (omega * t1).cos());

            // Newton on u1 with a1, v1 eliminated by the Newmark relations.
            let mut u1 = &u + &v * dt + &acc * (dt * dt * T::of(0.5));
            let mut converged = false;
            for _ in 0..25 {
                let a1 = (&u1 - &u - &v * dt) * four_dt2 - &acc;
                let v1 = &v + (&acc + &a1) * (dt * T::of(0.5));
                let mut res = m * &a1 + c * &v1 + k * &u1 - &load;
                sys.add_nl_force(&u1, &mut res);
                if res.norm() <= tol {
                    converged = true;
                    break;
                }
                let mut jac = m * four_dt2 + c * two_dt + k;
                sys.add_nl_jacobian(&u1, &mut jac);
                let lu = LU::new(jac);
                let Some(du) = lu.solve(&res) else {
                    return Err(HbError::SingularJacobian {
                        omega: omega.to64(),
                    });
                };
                u1 -= du;
            }
            if !converged {
                return Err(HbError::NonConvergence {
                    iterations: 25,
                    residual: f64::NAN,
                });
            }
            let a1 = (&u1 - &u - &v * dt) * four_dt2 - &acc;
            v = &v + (&acc + &a1) * (dt * T::of(0.5));
            acc = a1;
            u = u1;
            step_count += 1;
        }

        if cycle > 0 {
            let diff = (&samples - &prev_period).norm();
            let scale = samples.norm();
            if diff <= T::of(1e-8) * scale.max(T::of(1e-300)) {
                break;
            }
        }
        prev_period.copy_from(&samples);
    }

    // DFT of the recorded period; slot k holds the sample at τ = 2πk/spc.
    let spc = steps_per_cycle;
    let inv = T::one() / T::of(spc as f64);
    let two = T::of(2.0);
    let mut orbit = FourierOrbit::zero(n, h_out.max(1), omega);
    for dof in 0..n {
        let mut a0 = T::zero();
        for kk in 0..spc {
            a0 += samples[(dof, kk)];
        }
        orbit.set_a0(dof, a0 * inv);
        for h in 1..=h_out.max(1) {
            let mut ah = T::zero();
            let mut bh = T::zero();
            for kk in 0..spc {
                let tau = two * T::pi() * T::of((h * kk) as f64) * inv;
                ah += samples[(dof, kk)] * tau.cos();
                bh += samples[(dof, kk)] * tau.sin();
            }
            orbit.set_a(dof, h, ah * two * inv);
            orbit.set_b(dof, h, bh * two * inv);
        }
    }
    let _ = nl_f.len();
    Ok(orbit)
}
